//! Conic programs over Hermitian matrix variables.
//!
//! Programs are built from [`Expr`]essions in matrix variables, compiled to a
//! real linear matrix inequality ([`LmiProblem`]) and handed to an
//! [`SdpBackend`]. Inequalities `A ⪯ B` are written as `psd(B - A)`; scalars
//! are 1x1 variables.

mod compile;
mod expr;
pub mod ipm;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

pub use compile::{compile, embed_hermitian, real_embed, unembed, Compiled, Field};
pub use expr::{Expr, MapOp, Term, Var, VarId};
pub use ipm::{HkmSolver, IpmResult, LmiBlock, LmiProblem, SdpBackend, SolveOptions, SymSparse};

use crate::error::{Error, Result};
use crate::tensor::{LabeledMatrix, RegisterSystem};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    NumericalTrouble,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConstraintKind {
    Psd,
    Zero,
}

/// Which Hermitian matrices a variable may take.
#[derive(Clone, Debug, PartialEq)]
pub enum VarShape {
    /// Any Hermitian matrix on the system.
    Full,
    /// Hermitian matrices vanishing outside the listed (row, col) positions
    /// (either triangle; the pattern is symmetrized).
    Support(Vec<(usize, usize)>),
    /// Real linear combinations of the given Hermitian matrices.
    Span(Vec<LabeledMatrix>),
}

#[derive(Clone, Debug)]
pub(crate) struct VarDecl {
    pub var: Var,
    pub shape: VarShape,
}

#[derive(Clone, Debug)]
pub struct Constraint {
    pub name: String,
    pub kind: ConstraintKind,
    pub expr: Expr,
}

#[derive(Clone, Debug, Default)]
pub struct ConicProgram {
    pub(crate) vars: Vec<VarDecl>,
    pub(crate) constraints: Vec<Constraint>,
    pub(crate) objective: Option<(Sense, Expr)>,
}

impl ConicProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self, name: &str, system: RegisterSystem) -> Var {
        self.push_var(name, system, VarShape::Full)
    }

    pub fn add_scalar(&mut self, name: &str) -> Var {
        self.push_var(name, RegisterSystem::scalar(), VarShape::Full)
    }

    pub fn add_var_with_support(&mut self, name: &str, system: RegisterSystem, support: &[(usize, usize)]) -> Result<Var> {
        let n = system.dim();
        let mut pattern: Vec<(usize, usize)> = Vec::with_capacity(support.len());
        for &(i, j) in support {
            if i >= n || j >= n {
                return Err(Error::dims(format!("support entry ({i},{j}) outside dimension {n}")));
            }
            pattern.push((i.min(j), i.max(j)));
        }
        pattern.sort_unstable();
        pattern.dedup();
        Ok(self.push_var(name, system, VarShape::Support(pattern)))
    }

    pub fn add_var_in_span(&mut self, name: &str, system: RegisterSystem, basis: Vec<LabeledMatrix>) -> Result<Var> {
        let mut aligned = Vec::with_capacity(basis.len());
        for b in basis {
            let b = if b.system() == &system { b } else { b.permute_registers(&system.labels())? };
            let d = b.hermitian_defect();
            if d > crate::tensor::HERMITIAN_TOL {
                return Err(Error::NotHermitian(d));
            }
            aligned.push(b);
        }
        if aligned.is_empty() {
            return Err(Error::param(format!("variable `{name}` has an empty span")));
        }
        Ok(self.push_var(name, system, VarShape::Span(aligned)))
    }

    fn push_var(&mut self, name: &str, system: RegisterSystem, shape: VarShape) -> Var {
        let var = Var { id: VarId(self.vars.len()), name: name.to_string(), system };
        self.vars.push(VarDecl { var: var.clone(), shape });
        var
    }

    fn check_vars(&self, e: &Expr) -> Result<()> {
        for t in e.terms() {
            match self.vars.get(t.var.0) {
                Some(d) if d.var.system == t.var_system => {}
                _ => return Err(Error::param(format!("expression uses a variable foreign to this program ({})", t.var.0))),
            }
        }
        Ok(())
    }

    /// expr ⪰ 0
    pub fn psd(&mut self, name: &str, expr: Expr) -> Result<()> {
        self.check_vars(&expr)?;
        self.constraints.push(Constraint { name: name.to_string(), kind: ConstraintKind::Psd, expr });
        Ok(())
    }

    /// expr = 0
    pub fn zero(&mut self, name: &str, expr: Expr) -> Result<()> {
        self.check_vars(&expr)?;
        self.constraints.push(Constraint { name: name.to_string(), kind: ConstraintKind::Zero, expr });
        Ok(())
    }

    pub fn maximize(&mut self, expr: Expr) -> Result<()> {
        self.set_objective(Sense::Maximize, expr)
    }

    pub fn minimize(&mut self, expr: Expr) -> Result<()> {
        self.set_objective(Sense::Minimize, expr)
    }

    fn set_objective(&mut self, sense: Sense, expr: Expr) -> Result<()> {
        self.check_vars(&expr)?;
        if expr.system().dim() != 1 {
            return Err(Error::dims("objective must be a scalar expression"));
        }
        self.objective = Some((sense, expr));
        Ok(())
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    /// True if every constant and span basis matrix is real.
    pub fn is_real(&self) -> bool {
        let expr_real = |e: &Expr| {
            e.constant_part().is_none_or(|c| c.is_real())
                && e.terms().iter().all(|t| {
                    t.ops.iter().all(|op| match op {
                        MapOp::KronLeft(m) | MapOp::KronRight(m) | MapOp::TraceAgainst(m) => m.is_real(),
                        _ => true,
                    })
                })
        };
        self.vars.iter().all(|d| match &d.shape {
            VarShape::Span(b) => b.iter().all(|m| m.is_real()),
            _ => true,
        }) && self.constraints.iter().all(|c| expr_real(&c.expr))
            && self.objective.as_ref().is_none_or(|(_, e)| expr_real(e))
    }

    /// Solves with the default backend, restricting to real symmetric
    /// variables when all program data is real.
    pub fn solve(&self, opts: &SolveOptions) -> Result<Solution> {
        let field = if self.is_real() { Field::Real } else { Field::Complex };
        self.solve_with(&HkmSolver, opts, field)
    }

    pub fn solve_with(&self, backend: &dyn SdpBackend, opts: &SolveOptions, field: Field) -> Result<Solution> {
        let compiled = compile(self, field)?;
        let raw = backend.solve(&compiled.problem, opts);
        let assignments = compiled.assignments(&raw.y);
        let max_primal_residual = self.max_residual(&assignments)?;
        Ok(Solution {
            status: raw.status,
            value: compiled.sign * raw.primal_objective + compiled.objective_constant,
            dual_value: compiled.sign * raw.dual_objective + compiled.objective_constant,
            assignments,
            max_primal_residual,
            iterations: raw.iterations,
            primal_infeasibility: raw.primal_infeasibility,
            dual_infeasibility: raw.dual_infeasibility,
            relative_gap: raw.relative_gap,
            detail: raw.detail,
        })
    }

    /// Largest constraint violation of an assignment, recomputed densely.
    pub fn max_residual(&self, values: &HashMap<VarId, LabeledMatrix>) -> Result<f64> {
        let mut worst = 0.0f64;
        for c in &self.constraints {
            let v = c.expr.eval(values)?;
            let r = match c.kind {
                ConstraintKind::Zero => v.max_abs(),
                ConstraintKind::Psd => {
                    let h = crate::tensor::symmetrize(v.entries());
                    let ev = crate::tensor::hermitian_eigenvalues(&h);
                    (-ev.first().copied().unwrap_or(0.0)).max(0.0)
                }
            };
            worst = worst.max(r);
        }
        Ok(worst)
    }

    /// Plain-text listing of the compiled standard form.
    pub fn dump(&self) -> Result<String> {
        let field = if self.is_real() { Field::Real } else { Field::Complex };
        Ok(compile(self, field)?.dump())
    }
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub status: SolveStatus,
    pub value: f64,
    pub dual_value: f64,
    pub assignments: HashMap<VarId, LabeledMatrix>,
    pub max_primal_residual: f64,
    pub iterations: usize,
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
    pub relative_gap: f64,
    pub detail: String,
}

impl Solution {
    pub fn value_of(&self, v: &Var) -> &LabeledMatrix {
        &self.assignments[&v.id]
    }

    pub fn scalar_of(&self, v: &Var) -> f64 {
        self.assignments[&v.id].get(0, 0).re
    }

    /// Turns any non-optimal status into an error.
    pub fn require_optimal(self) -> Result<Self> {
        if self.status == SolveStatus::Optimal {
            Ok(self)
        } else {
            Err(Error::Solver { status: self.status, detail: self.detail })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::C64;
    use nalgebra::DMatrix;

    fn sys(pairs: &[(&str, usize)]) -> RegisterSystem {
        RegisterSystem::from_pairs(pairs).unwrap()
    }

    #[test]
    fn max_trace_below_identity() {
        let mut p = ConicProgram::new();
        let s = sys(&[("A", 2)]);
        let x = p.add_var("X", s.clone());
        p.psd("X>=0", x.expr()).unwrap();
        p.psd("X<=1", Expr::constant(LabeledMatrix::identity(s)).unwrap().sub(x.expr()).unwrap()).unwrap();
        p.maximize(x.expr().trace().unwrap()).unwrap();
        let sol = p.solve(&SolveOptions::default()).unwrap().require_optimal().unwrap();
        assert!((sol.value - 2.0).abs() < 1e-7);
        assert!(sol.max_primal_residual < 1e-7);
    }

    #[test]
    fn spectral_norm_of_diagonal() {
        let mut p = ConicProgram::new();
        let a = p.add_scalar("alpha");
        let s = sys(&[("A", 2)]);
        let h = LabeledMatrix::from_real(s.clone(), &DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 3.0])).unwrap();
        let lhs = a.expr().kron_identity(&s).unwrap().sub(Expr::constant(h).unwrap()).unwrap();
        p.psd("alpha*1 >= H", lhs).unwrap();
        p.minimize(a.expr()).unwrap();
        let sol = p.solve(&SolveOptions::default()).unwrap().require_optimal().unwrap();
        assert!((sol.value - 3.0).abs() < 1e-7);
        assert!((sol.dual_value - 3.0).abs() < 1e-7);
    }

    fn rank_one_program() -> (ConicProgram, LabeledMatrix) {
        let s = sys(&[("A", 2), ("B", 2)]);
        let phi = LabeledMatrix::max_entangled(2, ("A", "B")).unwrap();
        let mut p = ConicProgram::new();
        let x = p.add_var("X", s.clone());
        p.psd("X>=0", x.expr()).unwrap();
        p.psd("X<=1", Expr::constant(LabeledMatrix::identity(s)).unwrap().sub(x.expr()).unwrap()).unwrap();
        p.zero("trX=1", x.expr().trace().unwrap().sub(Expr::scalar(1.0)).unwrap()).unwrap();
        p.maximize(x.expr().trace_against(&phi).unwrap()).unwrap();
        (p, phi)
    }

    #[test]
    fn rank_one_optimum_in_both_fields() {
        let (p, phi) = rank_one_program();
        for field in [Field::Real, Field::Complex] {
            let sol = p.solve_with(&HkmSolver, &SolveOptions::default(), field).unwrap().require_optimal().unwrap();
            assert!((sol.value - 1.0).abs() < 1e-7, "{field:?}");
            let x = &sol.assignments[&VarId(0)];
            assert!(x.max_abs_diff(&phi).unwrap() < 1e-4);
        }
    }

    #[test]
    fn complex_data_selects_complex_field() {
        let s = sys(&[("A", 2)]);
        let i = C64::new(0.0, 1.0);
        let z = C64::new(0.0, 0.0);
        let o = C64::new(1.0, 0.0);
        // projector onto (|0> + i|1>)/sqrt2
        let proj = LabeledMatrix::hermitian(s.clone(), DMatrix::from_row_slice(2, 2, &[o, -i, i, o]) * C64::new(0.5, 0.0))
            .unwrap();
        let mut p = ConicProgram::new();
        let x = p.add_var("X", s.clone());
        p.psd("X>=0", x.expr()).unwrap();
        p.zero("trX=1", x.expr().trace().unwrap().sub(Expr::scalar(1.0)).unwrap()).unwrap();
        p.maximize(x.expr().trace_against(&proj).unwrap()).unwrap();
        assert!(!p.is_real());
        let sol = p.solve(&SolveOptions::default()).unwrap().require_optimal().unwrap();
        assert!((sol.value - 1.0).abs() < 1e-7);
        assert!(sol.assignments[&x.id()].max_abs_diff(&proj).unwrap() < 1e-4);
        let _ = z;
    }

    #[test]
    fn indistinguishable_state_pair() {
        // max tr(W (rho - rho)) + 1/2 subject to 0 <= W <= 1
        let s = sys(&[("A", 2)]);
        let mut p = ConicProgram::new();
        let w = p.add_var("W", s.clone());
        p.psd("W>=0", w.expr()).unwrap();
        p.psd("W<=1", Expr::constant(LabeledMatrix::identity(s.clone())).unwrap().sub(w.expr()).unwrap()).unwrap();
        let zero = LabeledMatrix::zeros(s);
        p.maximize(w.expr().trace_against(&zero).unwrap().add(Expr::scalar(0.5)).unwrap()).unwrap();
        let sol = p.solve(&SolveOptions::default()).unwrap().require_optimal().unwrap();
        assert!((sol.value - 0.5).abs() < 1e-8);
    }

    #[test]
    fn infeasible_and_unbounded_programs() {
        let s = sys(&[("A", 2)]);
        let mut p = ConicProgram::new();
        let x = p.add_var("X", s.clone());
        p.psd("X>=0", x.expr()).unwrap();
        p.psd("-X-1>=0", x.expr().scale(-1.0).sub(Expr::constant(LabeledMatrix::identity(s.clone())).unwrap()).unwrap())
            .unwrap();
        p.minimize(x.expr().trace().unwrap()).unwrap();
        assert_eq!(p.solve(&SolveOptions::default()).unwrap().status, SolveStatus::Infeasible);

        let mut q = ConicProgram::new();
        let x = q.add_var("X", s);
        q.psd("X>=0", x.expr()).unwrap();
        q.maximize(x.expr().trace().unwrap()).unwrap();
        let sol = q.solve(&SolveOptions::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Unbounded);
        assert!(sol.require_optimal().is_err());
    }

    #[test]
    fn support_and_span_shapes() {
        let s = sys(&[("A", 3)]);
        let target = LabeledMatrix::from_real(
            s.clone(),
            &DMatrix::from_row_slice(3, 3, &[0.2, 0.0, 0.3, 0.0, 0.1, 0.0, 0.3, 0.0, 0.7]),
        )
        .unwrap();
        // a diagonal-only variable cannot pick up the coherence
        let mut p = ConicProgram::new();
        let x = p.add_var_with_support("X", s.clone(), &[(0, 0), (1, 1), (2, 2)]).unwrap();
        p.psd("X>=0", x.expr()).unwrap();
        p.zero("trX=1", x.expr().trace().unwrap().sub(Expr::scalar(1.0)).unwrap()).unwrap();
        p.maximize(x.expr().trace_against(&target).unwrap()).unwrap();
        let sol = p.solve(&SolveOptions::default()).unwrap().require_optimal().unwrap();
        assert!((sol.value - 0.7).abs() < 1e-7);

        let mut q = ConicProgram::new();
        let basis = vec![LabeledMatrix::identity(s.clone()), target.clone()];
        let y = q.add_var_in_span("Y", s.clone(), basis).unwrap();
        q.psd("Y>=0", y.expr()).unwrap();
        q.zero("trY=1", y.expr().trace().unwrap().sub(Expr::scalar(1.0)).unwrap()).unwrap();
        q.maximize(y.expr().trace_against(&target).unwrap()).unwrap();
        let sol = q.solve(&SolveOptions::default()).unwrap().require_optimal().unwrap();
        let ev = target.hermitian_eigenvalues().unwrap();
        assert!(sol.value <= ev[2] + 1e-7);
        assert!(sol.assignments[&y.id()].is_psd(1e-7));
    }

    #[test]
    fn dump_lists_blocks() {
        let (p, _) = rank_one_program();
        let text = p.dump().unwrap();
        assert!(text.contains("psd X>=0"));
        assert!(text.contains("equalities"));
    }
}
