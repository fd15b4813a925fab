//! Amplitude damping AD(γ) against AD(1 − γ) over parallel copies.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::channel::{amplitude_damping, tensor_power, ChannelEnsemble, ChoiOperator};
use crate::conic::{SolveOptions, VarShape};
use crate::discrimination::{psucc_global_shaped, psucc_ppt_k_shaped, TesterShape};
use crate::error::{Error, Result};
use crate::exec;
use crate::symmetry::charge_support;

pub const MAX_COPIES: usize = 3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fig5Row {
    pub gamma: f64,
    pub p_global: f64,
    pub p_k1: f64,
    pub p_k2: f64,
}

/// γ = 0, 0.02, ..., 0.2
pub fn default_gamma_grid() -> Vec<f64> {
    (0..=10).map(|i| i as f64 * 0.02).collect()
}

fn bits(x: usize, n: usize) -> impl Iterator<Item = i64> {
    (0..n).rev().map(move |j| ((x >> j) & 1) as i64)
}

/// Amplitude damping commutes with phase rotations on each copy, so optimal
/// testers only couple basis states with equal per-copy charge
/// (output excitation minus input excitation).
pub fn phase_covariant_shape(c: &ChoiOperator, copies: usize) -> Result<TesterShape> {
    let dout = c.d_out();
    if c.d_in() != 1 << copies || dout != 1 << copies {
        return Err(Error::dims("expected qubit-to-qubit copies"));
    }
    let w = charge_support(c.system(), |i| {
        let (a, b) = (i / dout, i % dout);
        bits(b, copies).zip(bits(a, copies)).map(|(o, x)| o - x).collect()
    });
    let rho = charge_support(&c.input_system(), |a| bits(a, copies).collect());
    Ok(TesterShape {
        w: VarShape::Support(w.clone()),
        q: VarShape::Support(w),
        rho: VarShape::Support(rho.clone()),
        sigma: VarShape::Support(rho),
    })
}

pub fn ad_pair(gamma: f64, copies: usize) -> Result<(ChoiOperator, ChoiOperator)> {
    if !(1..=MAX_COPIES).contains(&copies) {
        return Err(Error::param(format!("copies must be 1, 2 or 3, got {copies}")));
    }
    let n = tensor_power(&amplitude_damping(gamma)?, copies)?;
    let m = tensor_power(&amplitude_damping(1.0 - gamma)?, copies)?;
    Ok((n, m))
}

pub fn fig5_point(gamma: f64, copies: usize, opts: &SolveOptions) -> Result<Fig5Row> {
    let (n, m) = ad_pair(gamma, copies)?;
    let shape = phase_covariant_shape(&n, copies)?;
    let ens = ChannelEnsemble::binary(n.clone(), m.clone(), 0.5)?;
    let p_global = psucc_global_shaped(&ens, &shape, opts)?.value;
    let p_k1 = psucc_ppt_k_shaped(&n, &m, 0.5, 1, &shape, opts)?.value;
    let p_k2 = psucc_ppt_k_shaped(&n, &m, 0.5, 2, &shape, opts)?.value;
    Ok(Fig5Row { gamma, p_global, p_k1, p_k2 })
}

/// One row per γ, in grid order.
pub fn fig5(gammas: &[f64], copies: usize, opts: &SolveOptions) -> Result<Vec<Fig5Row>> {
    if gammas.is_empty() {
        return Err(Error::param("empty γ grid"));
    }
    if let Some(g) = gammas.iter().find(|g| !(0.0..=1.0).contains(*g)) {
        return Err(Error::param(format!("γ = {g} outside [0, 1]")));
    }
    ad_pair(0.0, copies)?;
    exec::map(opts.exec, gammas, |&g| fig5_point(g, copies, opts)).into_iter().collect()
}

pub fn write_fig5_csv<W: Write>(rows: &[Fig5Row], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}
