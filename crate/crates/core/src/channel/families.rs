use nalgebra::DMatrix;

use super::{ChannelDims, ChoiOperator, A0, A1, B0, B1};
use crate::error::{Error, Result};
use crate::tensor::{LabeledMatrix, RegisterSystem, C64};

fn check_prob(name: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::param(format!("{name} = {p} outside [0, 1]")));
    }
    Ok(())
}

fn check_dim(name: &str, d: usize) -> Result<()> {
    if d == 0 {
        return Err(Error::param(format!("{name} must be at least 1")));
    }
    Ok(())
}

/// J = sum_K |K>><<K| with |K>> = sum_j |j> ⊗ K|j>.
pub fn choi_from_kraus(kraus: &[DMatrix<C64>], dims: ChannelDims) -> Result<ChoiOperator> {
    let (din, dout) = (dims.d_in(), dims.d_out());
    if kraus.is_empty() {
        return Err(Error::param("at least one Kraus operator is required"));
    }
    let mut sum = DMatrix::<C64>::zeros(din, din);
    for k in kraus {
        if k.nrows() != dout || k.ncols() != din {
            return Err(Error::dims(format!(
                "Kraus operator is {}x{}, expected {dout}x{din}",
                k.nrows(),
                k.ncols()
            )));
        }
        sum += k.adjoint() * k;
    }
    let dev = crate::tensor::max_abs(&(sum - DMatrix::identity(din, din)));
    if dev > 1e-10 {
        return Err(Error::NotTracePreserving(dev));
    }
    let n = din * dout;
    let mut j = DMatrix::<C64>::zeros(n, n);
    for k in kraus {
        let v = DMatrix::from_fn(n, 1, |idx, _| k[(idx % dout, idx / dout)]);
        j += &v * v.adjoint();
    }
    ChoiOperator::canonical(LabeledMatrix::hermitian(dims.system(), j)?)
}

/// Builds a Choi matrix given on `pairs` order and moves it to canonical order.
fn canonical_from(m: LabeledMatrix, dims: ChannelDims) -> Result<ChoiOperator> {
    let m = pad_missing(m, dims)?;
    ChoiOperator::canonical(m.permute_registers(&[A0, B0, A1, B1])?)
}

/// Appends one-dimensional canonical registers absent from `m`.
fn pad_missing(m: LabeledMatrix, dims: ChannelDims) -> Result<LabeledMatrix> {
    let mut out = m;
    for (l, d) in [(A0, dims.a0), (B0, dims.b0), (A1, dims.a1), (B1, dims.b1)] {
        if !out.system().contains(l) {
            if d != 1 {
                return Err(Error::dims(format!("register {l} missing with dimension {d}")));
            }
            out = out.kron(&LabeledMatrix::identity(RegisterSystem::from_pairs(&[(l, 1)])?))?;
        }
    }
    Ok(out)
}

/// x ↦ (1 - p) x + p tr(x) 1/(d_A d_B) on A0 B0 -> A1 B1.
pub fn depolarizing_bipartite(da: usize, db: usize, p: f64) -> Result<ChoiOperator> {
    check_dim("d_A", da)?;
    check_dim("d_B", db)?;
    check_prob("p", p)?;
    let d = (da * db) as f64;
    let phi = LabeledMatrix::max_entangled(da, (A0, A1))?.kron(&LabeledMatrix::max_entangled(db, (B0, B1))?)?;
    let dims = ChannelDims::bipartite(da, db, da, db);
    let id = LabeledMatrix::identity(dims.system());
    let j = phi.permute_registers(&[A0, B0, A1, B1])?.scale(d * (1.0 - p)).add(&id.scale(p / d))?;
    ChoiOperator::canonical(j)
}

/// Point-to-point depolarizing channel from Alice's input to Bob's output.
pub fn depolarizing_pp(d: usize, p: f64) -> Result<ChoiOperator> {
    check_dim("d", d)?;
    check_prob("p", p)?;
    let df = d as f64;
    let phi = LabeledMatrix::max_entangled(d, (A0, B1))?;
    let id = LabeledMatrix::identity(phi.system().clone());
    let j = phi.scale(df * (1.0 - p)).add(&id.scale(p / df))?;
    canonical_from(j, ChannelDims::point_to_point(d, d))
}

/// Swap of the two parties' d-level inputs followed by depolarizing noise.
pub fn depolarized_swap(d: usize, p: f64) -> Result<ChoiOperator> {
    check_dim("d", d)?;
    check_prob("p", p)?;
    let df = (d * d) as f64;
    let phi = LabeledMatrix::max_entangled(d, (A0, B1))?.kron(&LabeledMatrix::max_entangled(d, (B0, A1))?)?;
    let id = LabeledMatrix::identity(phi.system().clone());
    let j = phi.scale(df * (1.0 - p)).add(&id.scale(p / df))?;
    canonical_from(j, ChannelDims::bipartite(d, d, d, d))
}

/// Werner–Holevo channels: (1 + F)/(d + 1) for j = 0, (1 - F)/(d - 1) for j = 1.
pub fn werner_holevo(d: usize, j: u8) -> Result<ChoiOperator> {
    check_dim("d", d)?;
    let f = LabeledMatrix::swap_operator(d, (A0, B1))?;
    let id = LabeledMatrix::identity(f.system().clone());
    let m = match j {
        0 => id.add(&f)?.scale(1.0 / (d as f64 + 1.0)),
        1 => {
            if d < 2 {
                return Err(Error::param("the antisymmetric Werner–Holevo channel needs d >= 2"));
            }
            id.sub(&f)?.scale(1.0 / (d as f64 - 1.0))
        }
        _ => return Err(Error::param(format!("Werner–Holevo index must be 0 or 1, got {j}"))),
    };
    canonical_from(m, ChannelDims::point_to_point(d, d))
}

/// Discards the input and prepares `state` on the output registers.
pub fn replacer(dims: ChannelDims, state: &DMatrix<C64>) -> Result<ChoiOperator> {
    if state.nrows() != dims.d_out() || state.ncols() != dims.d_out() {
        return Err(Error::dims("replacement state does not match the output dimension"));
    }
    let s = LabeledMatrix::hermitian(dims.output_system(), state.clone())?;
    if !s.is_psd(1e-10) || (s.trace().re - 1.0).abs() > 1e-10 {
        return Err(Error::param("replacement state must be a density matrix"));
    }
    ChoiOperator::canonical(LabeledMatrix::identity(dims.input_system()).kron(&s)?)
}

/// Classical channel from a column-stochastic matrix P[out, in] over the
/// product alphabets.
pub fn classical(dims: ChannelDims, stochastic: &DMatrix<f64>) -> Result<ChoiOperator> {
    let (din, dout) = (dims.d_in(), dims.d_out());
    if stochastic.nrows() != dout || stochastic.ncols() != din {
        return Err(Error::dims(format!("stochastic matrix must be {dout}x{din}")));
    }
    for i in 0..din {
        let col = stochastic.column(i);
        if col.iter().any(|&x| x < -1e-12) || (col.sum() - 1.0).abs() > 1e-10 {
            return Err(Error::NotTracePreserving((col.sum() - 1.0).abs()));
        }
    }
    let n = din * dout;
    let j = DMatrix::from_fn(n, n, |r, c| {
        if r == c {
            C64::new(stochastic[(r % dout, r / dout)], 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    ChoiOperator::canonical(LabeledMatrix::hermitian(dims.system(), j)?)
}

/// Qubit amplitude damping with decay probability `gamma`, point-to-point.
pub fn amplitude_damping(gamma: f64) -> Result<ChoiOperator> {
    check_prob("gamma", gamma)?;
    let z = C64::new(0.0, 0.0);
    let r = |x: f64| C64::new(x, 0.0);
    let k0 = DMatrix::from_row_slice(2, 2, &[r(1.0), z, z, r((1.0 - gamma).sqrt())]);
    let k1 = DMatrix::from_row_slice(2, 2, &[z, r(gamma.sqrt()), z, z]);
    choi_from_kraus(&[k0, k1], ChannelDims::point_to_point(2, 2))
}

/// The identity channel on a d-level point-to-point line.
pub fn identity_channel(d: usize) -> Result<ChoiOperator> {
    depolarizing_pp(d, 0.0)
}
