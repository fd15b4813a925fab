//! Affine expressions in Hermitian matrix variables.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::tensor::{LabeledMatrix, RegisterSystem, SparseMatrix, HERMITIAN_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub(crate) usize);

impl VarId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Handle to a decision variable of a [`super::ConicProgram`].
#[derive(Clone, Debug, PartialEq)]
pub struct Var {
    pub(crate) id: VarId,
    pub(crate) name: String,
    pub(crate) system: RegisterSystem,
}

impl Var {
    pub fn id(&self) -> VarId {
        self.id
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn system(&self) -> &RegisterSystem {
        &self.system
    }

    pub fn expr(&self) -> Expr {
        Expr {
            system: self.system.clone(),
            constant: None,
            terms: vec![Term { coeff: 1.0, var: self.id, var_system: self.system.clone(), ops: Vec::new() }],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum MapOp {
    PartialTranspose(Vec<String>),
    PartialTrace(Vec<String>),
    KronLeft(LabeledMatrix),
    KronRight(LabeledMatrix),
    Permute(Vec<String>),
    /// X -> tr(M X), a 1x1 result.
    TraceAgainst(LabeledMatrix),
}

impl MapOp {
    fn apply_dense(&self, m: &LabeledMatrix) -> Result<LabeledMatrix> {
        match self {
            MapOp::PartialTranspose(l) => m.partial_transpose(l),
            MapOp::PartialTrace(l) => m.partial_trace(l),
            MapOp::KronLeft(k) => k.kron(m),
            MapOp::KronRight(k) => m.kron(k),
            MapOp::Permute(o) => m.permute_registers(o),
            MapOp::TraceAgainst(k) => Ok(LabeledMatrix::scalar(k.trace_product(m)?)),
        }
    }

    pub(crate) fn apply_sparse(&self, m: &SparseMatrix) -> Result<SparseMatrix> {
        match self {
            MapOp::PartialTranspose(l) => m.partial_transpose(l),
            MapOp::PartialTrace(l) => m.partial_trace(l),
            MapOp::KronLeft(k) => m.kron_left(k),
            MapOp::KronRight(k) => m.kron_right(k),
            MapOp::Permute(o) => m.permute_registers(o),
            MapOp::TraceAgainst(k) => {
                if k.system() != m.system() {
                    return Err(Error::dims("trace pairing across different systems"));
                }
                let v: crate::tensor::C64 = m.entries().iter().map(|&(r, c, v)| k.get(c, r) * v).sum();
                SparseMatrix::new(RegisterSystem::scalar(), vec![(0, 0, v)])
            }
        }
    }

    fn output_system(&self, input: &RegisterSystem) -> Result<RegisterSystem> {
        match self {
            MapOp::PartialTranspose(l) => input.mask(l).map(|_| input.clone()),
            MapOp::PartialTrace(l) => input.without(l),
            MapOp::KronLeft(k) => k.system().concat(input),
            MapOp::KronRight(k) => input.concat(k.system()),
            MapOp::Permute(o) => input.permutation_map(o).map(|(s, _)| s),
            MapOp::TraceAgainst(k) => {
                if k.system() != input {
                    return Err(Error::dims(format!(
                        "trace pairing needs {:?}, got {:?}",
                        k.system().labels(),
                        input.labels()
                    )));
                }
                Ok(RegisterSystem::scalar())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub coeff: f64,
    pub var: VarId,
    pub(crate) var_system: RegisterSystem,
    pub ops: Vec<MapOp>,
}

/// constant + sum of coeff * ops(var), all on a common register system.
#[derive(Clone, Debug, PartialEq)]
pub struct Expr {
    system: RegisterSystem,
    constant: Option<LabeledMatrix>,
    terms: Vec<Term>,
}

fn check_hermitian(m: &LabeledMatrix) -> Result<()> {
    let d = m.hermitian_defect();
    if d > HERMITIAN_TOL {
        return Err(Error::NotHermitian(d));
    }
    Ok(())
}

impl Expr {
    pub fn constant(m: LabeledMatrix) -> Result<Self> {
        check_hermitian(&m)?;
        Ok(Expr { system: m.system().clone(), constant: Some(m), terms: Vec::new() })
    }

    pub fn scalar(x: f64) -> Self {
        Expr { system: RegisterSystem::scalar(), constant: Some(LabeledMatrix::scalar(x)), terms: Vec::new() }
    }

    pub fn zero(system: RegisterSystem) -> Self {
        Expr { system, constant: None, terms: Vec::new() }
    }

    pub fn system(&self) -> &RegisterSystem {
        &self.system
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn constant_part(&self) -> Option<&LabeledMatrix> {
        self.constant.as_ref()
    }

    pub fn scale(mut self, s: f64) -> Self {
        self.constant = self.constant.map(|c| c.scale(s));
        for t in &mut self.terms {
            t.coeff *= s;
        }
        self
    }

    pub fn add(mut self, other: Expr) -> Result<Self> {
        let other = if other.system == self.system {
            other
        } else if other.system.len() == self.system.len()
            && other.system.registers().iter().all(|r| self.system.registers().contains(r))
        {
            other.permute(&self.system.labels())?
        } else {
            return Err(Error::dims(format!(
                "cannot add expressions on {:?} and {:?}",
                self.system.labels(),
                other.system.labels()
            )));
        };
        self.constant = match (self.constant, other.constant) {
            (Some(a), Some(b)) => Some(a.add(&b)?),
            (a, b) => a.or(b),
        };
        self.terms.extend(other.terms);
        Ok(self)
    }

    pub fn sub(self, other: Expr) -> Result<Self> {
        self.add(other.scale(-1.0))
    }

    pub fn add_constant(self, m: LabeledMatrix) -> Result<Self> {
        self.add(Expr::constant(m)?)
    }

    fn push_op(mut self, op: MapOp) -> Result<Self> {
        self.system = op.output_system(&self.system)?;
        if let Some(c) = self.constant.take() {
            self.constant = Some(op.apply_dense(&c)?);
        }
        for t in &mut self.terms {
            t.ops.push(op.clone());
        }
        Ok(self)
    }

    pub fn partial_transpose<S: AsRef<str>>(self, labels: &[S]) -> Result<Self> {
        self.push_op(MapOp::PartialTranspose(labels.iter().map(|s| s.as_ref().to_string()).collect()))
    }

    pub fn partial_trace<S: AsRef<str>>(self, labels: &[S]) -> Result<Self> {
        self.push_op(MapOp::PartialTrace(labels.iter().map(|s| s.as_ref().to_string()).collect()))
    }

    /// Full trace, as a scalar expression.
    pub fn trace(self) -> Result<Self> {
        let labels: Vec<String> = self.system.labels().iter().map(|s| s.to_string()).collect();
        self.partial_trace(&labels)
    }

    pub fn kron_left(self, m: &LabeledMatrix) -> Result<Self> {
        check_hermitian(m)?;
        self.push_op(MapOp::KronLeft(m.clone()))
    }

    pub fn kron_right(self, m: &LabeledMatrix) -> Result<Self> {
        check_hermitian(m)?;
        self.push_op(MapOp::KronRight(m.clone()))
    }

    /// expr ⊗ 1 on `system`.
    pub fn kron_identity(self, system: &RegisterSystem) -> Result<Self> {
        self.kron_right(&LabeledMatrix::identity(system.clone()))
    }

    pub fn permute<S: AsRef<str>>(self, order: &[S]) -> Result<Self> {
        self.push_op(MapOp::Permute(order.iter().map(|s| s.as_ref().to_string()).collect()))
    }

    /// Scalar expression tr(M · self).
    pub fn trace_against(self, m: &LabeledMatrix) -> Result<Self> {
        check_hermitian(m)?;
        let m = if m.system() == &self.system { m.clone() } else { self.system_aligned(m)? };
        self.push_op(MapOp::TraceAgainst(m))
    }

    fn system_aligned(&self, m: &LabeledMatrix) -> Result<LabeledMatrix> {
        m.permute_registers(&self.system.labels())
    }

    /// Dense evaluation at the given variable values.
    pub fn eval(&self, values: &HashMap<VarId, LabeledMatrix>) -> Result<LabeledMatrix> {
        let mut acc = self.constant.clone().unwrap_or_else(|| LabeledMatrix::zeros(self.system.clone()));
        for t in &self.terms {
            let mut m = values
                .get(&t.var)
                .cloned()
                .ok_or_else(|| Error::param(format!("no value for variable {}", t.var.0)))?;
            for op in &t.ops {
                m = op.apply_dense(&m)?;
            }
            acc = acc.add(&m.scale(t.coeff))?;
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn var(id: usize, pairs: &[(&str, usize)]) -> Var {
        Var { id: VarId(id), name: format!("v{id}"), system: RegisterSystem::from_pairs(pairs).unwrap() }
    }

    #[test]
    fn expression_tracks_systems() {
        let rho = var(0, &[("A", 2)]);
        let w = var(1, &[("A", 2), ("B", 3)]);
        let b = RegisterSystem::from_pairs(&[("B", 3)]).unwrap();
        let e = rho.expr().kron_identity(&b).unwrap().sub(w.expr().partial_transpose(&["B"]).unwrap()).unwrap();
        assert_eq!(e.system().labels(), vec!["A", "B"]);
        assert_eq!(e.terms().len(), 2);
        let t = e.clone().partial_trace(&["B"]).unwrap();
        assert_eq!(t.system().labels(), vec!["A"]);
        assert!(e.clone().partial_trace(&["C"]).is_err());
        let swapped = w.expr().permute(&["B", "A"]).unwrap();
        // addition realigns registers
        assert!(w.expr().add(swapped).is_ok());
    }

    #[test]
    fn eval_matches_direct_computation() {
        let w = var(0, &[("A", 2), ("B", 2)]);
        let phi = LabeledMatrix::max_entangled(2, ("A", "B")).unwrap();
        let mut vals = HashMap::new();
        vals.insert(w.id(), phi.clone());
        let e = w.expr().partial_transpose(&["B"]).unwrap().scale(2.0);
        let got = e.eval(&vals).unwrap();
        let f = LabeledMatrix::swap_operator(2, ("A", "B")).unwrap();
        assert!(got.max_abs_diff(&f).unwrap() < 1e-15);
        let s = w.expr().trace_against(&phi).unwrap().eval(&vals).unwrap();
        assert!((s.get(0, 0).re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn non_hermitian_constants_rejected() {
        let s = RegisterSystem::from_pairs(&[("A", 2)]).unwrap();
        let m = LabeledMatrix::new(s, nalgebra::DMatrix::from_fn(2, 2, |i, j| crate::tensor::C64::new((i + 2 * j) as f64, 0.0)))
            .unwrap();
        assert!(matches!(Expr::constant(m), Err(Error::NotHermitian(_))));
    }
}
