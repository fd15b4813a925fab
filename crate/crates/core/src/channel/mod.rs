//! Choi operators of bipartite channels and the standard families.
//!
//! A bipartite channel maps A0 B0 to A1 B1 and its (unnormalized) Choi
//! operator lives on registers `A0, B0, A1, B1` in that order. A
//! point-to-point channel from Alice's input to Bob's output is the special
//! case with one-dimensional B0 and A1.

mod families;
mod spec;

pub use families::*;
pub use spec::ChannelSpec;

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{LabeledMatrix, Register, RegisterSystem, C64};

pub const A0: &str = "A0";
pub const B0: &str = "B0";
pub const A1: &str = "A1";
pub const B1: &str = "B1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Party {
    Alice,
    Bob,
}

/// Register dimensions of a bipartite channel A0 B0 -> A1 B1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelDims {
    pub a0: usize,
    pub b0: usize,
    pub a1: usize,
    pub b1: usize,
}

impl ChannelDims {
    pub fn bipartite(a0: usize, b0: usize, a1: usize, b1: usize) -> Self {
        ChannelDims { a0, b0, a1, b1 }
    }

    /// Alice's d_in-level input to Bob's d_out-level output.
    pub fn point_to_point(d_in: usize, d_out: usize) -> Self {
        ChannelDims { a0: d_in, b0: 1, a1: 1, b1: d_out }
    }

    pub fn d_in(&self) -> usize {
        self.a0 * self.b0
    }

    pub fn d_out(&self) -> usize {
        self.a1 * self.b1
    }

    pub fn system(&self) -> RegisterSystem {
        RegisterSystem::new(vec![
            Register::new(A0, self.a0),
            Register::new(B0, self.b0),
            Register::new(A1, self.a1),
            Register::new(B1, self.b1),
        ])
        .expect("canonical labels are distinct")
    }

    pub fn input_system(&self) -> RegisterSystem {
        RegisterSystem::new(vec![Register::new(A0, self.a0), Register::new(B0, self.b0)]).unwrap()
    }

    pub fn output_system(&self) -> RegisterSystem {
        RegisterSystem::new(vec![Register::new(A1, self.a1), Register::new(B1, self.b1)]).unwrap()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChoiOperator {
    matrix: LabeledMatrix,
    inputs: Vec<String>,
    outputs: Vec<String>,
    ownership: BTreeMap<String, Party>,
}

impl ChoiOperator {
    /// Wraps a matrix on the canonical registers `A0, B0, A1, B1`.
    pub fn canonical(matrix: LabeledMatrix) -> Result<Self> {
        if matrix.system().labels() != [A0, B0, A1, B1] {
            return Err(Error::dims(format!(
                "expected registers A0, B0, A1, B1, got {:?}",
                matrix.system().labels()
            )));
        }
        let ownership = [(A0, Party::Alice), (B0, Party::Bob), (A1, Party::Alice), (B1, Party::Bob)]
            .into_iter()
            .map(|(l, p)| (l.to_string(), p))
            .collect();
        Self::new(matrix, vec![A0.into(), B0.into()], vec![A1.into(), B1.into()], ownership)
    }

    pub fn new(
        matrix: LabeledMatrix,
        inputs: Vec<String>,
        outputs: Vec<String>,
        ownership: BTreeMap<String, Party>,
    ) -> Result<Self> {
        let labels = matrix.system().labels();
        let mut all: Vec<&str> = inputs.iter().chain(&outputs).map(|s| s.as_str()).collect();
        if all.len() != labels.len() {
            return Err(Error::dims("inputs and outputs must cover every register exactly once"));
        }
        all.sort_unstable();
        let mut sorted = labels.clone();
        sorted.sort_unstable();
        if all != sorted {
            return Err(Error::dims("inputs and outputs must cover every register exactly once"));
        }
        // the input registers come first so that rho ⊗ 1 lines up with the matrix
        if labels[..inputs.len()].iter().zip(&inputs).any(|(a, b)| a != b) {
            return Err(Error::dims("input registers must precede output registers"));
        }
        for l in &labels {
            if !ownership.contains_key(*l) {
                return Err(Error::param(format!("register `{l}` has no owner")));
            }
        }
        let d = matrix.hermitian_defect();
        if d > crate::tensor::HERMITIAN_TOL {
            return Err(Error::NotHermitian(d));
        }
        let matrix = LabeledMatrix::hermitian(matrix.system().clone(), matrix.into_entries())?;
        Ok(ChoiOperator { matrix, inputs, outputs, ownership })
    }

    pub fn matrix(&self) -> &LabeledMatrix {
        &self.matrix
    }

    pub fn system(&self) -> &RegisterSystem {
        self.matrix.system()
    }

    pub fn inputs(&self) -> &[String] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[String] {
        &self.outputs
    }

    pub fn ownership(&self) -> &BTreeMap<String, Party> {
        &self.ownership
    }

    pub fn input_system(&self) -> RegisterSystem {
        self.system().subsystem(&self.inputs).expect("inputs are registers")
    }

    pub fn output_system(&self) -> RegisterSystem {
        self.system().subsystem(&self.outputs).expect("outputs are registers")
    }

    pub fn d_in(&self) -> usize {
        self.input_system().dim()
    }

    pub fn d_out(&self) -> usize {
        self.output_system().dim()
    }

    /// Registers held by `party`, in register order.
    pub fn labels_of(&self, party: Party) -> Vec<String> {
        self.system()
            .labels()
            .into_iter()
            .filter(|l| self.ownership[*l] == party)
            .map(String::from)
            .collect()
    }

    pub fn inputs_of(&self, party: Party) -> Vec<String> {
        self.inputs.iter().filter(|l| self.ownership[*l] == party).cloned().collect()
    }

    pub fn dims(&self) -> Option<ChannelDims> {
        let s = self.system();
        (s.labels() == [A0, B0, A1, B1]).then(|| {
            let r = s.registers();
            ChannelDims { a0: r[0].dim, b0: r[1].dim, a1: r[2].dim, b1: r[3].dim }
        })
    }

    /// Worst violation of complete positivity and trace preservation.
    pub fn cptp_defect(&self) -> Result<f64> {
        let neg = (-self.matrix.min_eigenvalue()?).max(0.0);
        let tr_out = self.matrix.partial_trace(&self.outputs)?;
        let id = LabeledMatrix::identity(tr_out.system().clone());
        Ok(neg.max(tr_out.max_abs_diff(&id)?))
    }

    pub fn check_cptp(&self, tol: f64) -> Result<()> {
        let d = self.cptp_defect()?;
        if d > tol {
            return Err(Error::Invariant(format!("Choi operator violates CPTP by {d:.3e}")));
        }
        Ok(())
    }

    /// The channel applied to a state on the input registers.
    pub fn apply(&self, rho: &LabeledMatrix) -> Result<LabeledMatrix> {
        link_product(rho, &self.matrix)
    }

    pub fn same_shape(&self, other: &ChoiOperator) -> bool {
        self.system() == other.system()
            && self.inputs == other.inputs
            && self.outputs == other.outputs
            && self.ownership == other.ownership
    }
}

/// Prior-weighted channels sharing one register layout.
#[derive(Clone, Debug)]
pub struct ChannelEnsemble {
    channels: Vec<ChoiOperator>,
    probs: Vec<f64>,
}

impl ChannelEnsemble {
    pub fn new(channels: Vec<ChoiOperator>, probs: Vec<f64>) -> Result<Self> {
        if channels.is_empty() || channels.len() != probs.len() {
            return Err(Error::param("ensemble needs one prior per channel"));
        }
        if probs.iter().any(|&p| !(p >= 0.0)) || (probs.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return Err(Error::param("priors must be non-negative and sum to 1"));
        }
        if channels.iter().any(|c| !c.same_shape(&channels[0])) {
            return Err(Error::dims("ensemble channels must share register dimensions and ownership"));
        }
        Ok(ChannelEnsemble { channels, probs })
    }

    /// N with prior `lambda`, M with prior `1 - lambda`.
    pub fn binary(n: ChoiOperator, m: ChoiOperator, lambda: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::param(format!("prior {lambda} outside [0, 1]")));
        }
        Self::new(vec![n, m], vec![lambda, 1.0 - lambda])
    }

    pub fn channels(&self) -> &[ChoiOperator] {
        &self.channels
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.channels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.channels.is_empty()
    }
}

/// Link product tr_S[(J1^{T_S} ⊗ 1)(1 ⊗ J2)] over the registers S common to both.
///
/// The result carries J1's unshared registers followed by J2's.
pub fn link_product(j1: &LabeledMatrix, j2: &LabeledMatrix) -> Result<LabeledMatrix> {
    let s1 = j1.system();
    let s2 = j2.system();
    let shared: Vec<String> = s1.labels().into_iter().filter(|l| s2.contains(l)).map(String::from).collect();
    for l in &shared {
        if s1.dim_of(l)? != s2.dim_of(l)? {
            return Err(Error::dims(format!("shared register `{l}` has different dimensions")));
        }
    }
    let rest1 = s1.without(&shared)?;
    let rest2 = s2.without(&shared)?;
    let shared_sys = s1.subsystem(&shared)?;
    let order1: Vec<String> = rest1.labels().into_iter().chain(shared_sys.labels()).map(String::from).collect();
    let order2: Vec<String> = shared_sys.labels().into_iter().chain(rest2.labels()).map(String::from).collect();
    let a = j1
        .partial_transpose(&shared)?
        .permute_registers(&order1)?
        .kron(&LabeledMatrix::identity(rest2.clone()))?;
    let b = LabeledMatrix::identity(rest1).kron(&j2.permute_registers(&order2)?)?;
    a.matmul(&b)?.partial_trace(&shared)
}

/// Channel acting as `c1` on one copy and `c2` on a second copy; each
/// canonical register of the result fuses the two copies' registers.
pub fn parallel_compose(c1: &ChoiOperator, c2: &ChoiOperator) -> Result<ChoiOperator> {
    if c1.dims().is_none() || c2.dims().is_none() {
        return Err(Error::dims("parallel composition needs canonical channels"));
    }
    let second = c2.matrix().relabel(&["A0'", "B0'", "A1'", "B1'"])?;
    let joint = c1
        .matrix()
        .kron(&second)?
        .permute_registers(&["A0", "A0'", "B0", "B0'", "A1", "A1'", "B1", "B1'"])?;
    let merged = joint
        .merge_registers(&["A0", "A0'"], "A0*")?
        .merge_registers(&["B0", "B0'"], "B0*")?
        .merge_registers(&["A1", "A1'"], "A1*")?
        .merge_registers(&["B1", "B1'"], "B1*")?
        .relabel(&[A0, B0, A1, B1])?;
    ChoiOperator::canonical(merged)
}

/// `copies`-fold parallel use of a channel.
pub fn tensor_power(c: &ChoiOperator, copies: usize) -> Result<ChoiOperator> {
    if copies == 0 {
        return Err(Error::param("copies must be at least 1"));
    }
    let mut acc = c.clone();
    for _ in 1..copies {
        acc = parallel_compose(&acc, c)?;
    }
    Ok(acc)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CovarianceMode {
    /// Γ = Ū ⊗ V̄ ⊗ U ⊗ V
    Covariant,
    /// Γ = Ū ⊗ V̄ ⊗ V ⊗ U
    Cross,
}

/// max over pairs of ‖Γ J Γ† − J‖_max with Γ = Ū0 ⊗ V̄0 ⊗ U1 ⊗ V1.
pub fn covariance_defect(j: &ChoiOperator, unitaries: &[[DMatrix<C64>; 4]]) -> Result<f64> {
    let mut worst = 0.0f64;
    for [u0, v0, u1, v1] in unitaries {
        let g = u0.map(|z| z.conj()).kronecker(&v0.map(|z| z.conj())).kronecker(u1).kronecker(v1);
        let t = j.matrix().conjugate_by(&g)?;
        worst = worst.max(t.max_abs_diff(j.matrix())?);
    }
    Ok(worst)
}

pub fn verify_covariance(j: &ChoiOperator, pairs: &[(DMatrix<C64>, DMatrix<C64>)], mode: CovarianceMode) -> Result<f64> {
    let quads: Vec<[DMatrix<C64>; 4]> = pairs
        .iter()
        .map(|(u, v)| match mode {
            CovarianceMode::Covariant => [u.clone(), v.clone(), u.clone(), v.clone()],
            CovarianceMode::Cross => [u.clone(), v.clone(), v.clone(), u.clone()],
        })
        .collect();
    covariance_defect(j, &quads)
}
