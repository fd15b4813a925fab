//! Invariant subspaces of covariant channel pairs and the linear programs
//! they reduce to.

use nalgebra::DMatrix;

use crate::channel::{ChoiOperator, A0, A1, B0, B1};
use crate::conic::{ConicProgram, Expr, SolveOptions, Var, VarShape};
use crate::discrimination::{check_k, TesterShape};
use crate::error::{Error, Result};
use crate::tensor::{LabeledMatrix, RegisterSystem, C64};

const PROJECTOR_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BasisKind {
    IsotropicPair,
    CrossIsotropicPair,
    SingleIsotropic,
    Diagonal,
}

/// Mutually orthogonal projectors summing to the identity.
#[derive(Clone, Debug)]
pub struct CommutantBasis {
    pub projectors: Vec<LabeledMatrix>,
    pub kind: BasisKind,
}

fn to_canonical(m: LabeledMatrix, dims: [(&str, usize); 4]) -> Result<LabeledMatrix> {
    let mut out = m;
    for (l, d) in dims {
        if !out.system().contains(l) {
            out = out.kron(&LabeledMatrix::identity(RegisterSystem::from_pairs(&[(l, d)])?))?;
        }
    }
    out.permute_registers(&[A0, B0, A1, B1])
}

fn phi_pair(d: usize, labels: (&str, &str)) -> Result<(LabeledMatrix, LabeledMatrix)> {
    let phi = LabeledMatrix::max_entangled(d, labels)?;
    let rest = LabeledMatrix::identity(phi.system().clone()).sub(&phi)?;
    Ok((phi, rest))
}

impl CommutantBasis {
    pub fn new(projectors: Vec<LabeledMatrix>, kind: BasisKind) -> Result<Self> {
        let first = projectors.first().ok_or_else(|| Error::param("empty commutant basis"))?;
        let sys = first.system().clone();
        let mut sum = LabeledMatrix::zeros(sys.clone());
        for (i, p) in projectors.iter().enumerate() {
            let p = first.align(p)?;
            for (j, q) in projectors.iter().enumerate() {
                let prod = p.matmul(&first.align(q)?)?;
                let target = if i == j { p.clone() } else { LabeledMatrix::zeros(sys.clone()) };
                if prod.max_abs_diff(&target)? > PROJECTOR_TOL {
                    return Err(Error::Invariant(format!("projectors {i} and {j} are not orthogonal idempotents")));
                }
            }
            sum = sum.add(&p)?;
        }
        if sum.max_abs_diff(&LabeledMatrix::identity(sys))? > PROJECTOR_TOL {
            return Err(Error::Invariant("projectors do not sum to the identity".into()));
        }
        Ok(CommutantBasis { projectors, kind })
    }

    /// Φ_{A0A1} and Φ_{B0B1} with their complements: invariants of Ū ⊗ V̄ ⊗ U ⊗ V.
    pub fn isotropic_pair(da: usize, db: usize) -> Result<Self> {
        let (pa, qa) = phi_pair(da, (A0, A1))?;
        let (pb, qb) = phi_pair(db, (B0, B1))?;
        let ps = [(&pa, &pb), (&pa, &qb), (&qa, &pb), (&qa, &qb)]
            .into_iter()
            .map(|(a, b)| a.kron(b)?.permute_registers(&[A0, B0, A1, B1]))
            .collect::<Result<Vec<_>>>()?;
        Self::new(ps, BasisKind::IsotropicPair)
    }

    /// Φ_{A0B1} and Φ_{B0A1} with their complements: invariants of Ū ⊗ V̄ ⊗ V ⊗ U.
    pub fn cross_isotropic(d: usize) -> Result<Self> {
        let (pa, qa) = phi_pair(d, (A0, B1))?;
        let (pb, qb) = phi_pair(d, (B0, A1))?;
        let ps = [(&pa, &pb), (&pa, &qb), (&qa, &pb), (&qa, &qb)]
            .into_iter()
            .map(|(a, b)| a.kron(b)?.permute_registers(&[A0, B0, A1, B1]))
            .collect::<Result<Vec<_>>>()?;
        Self::new(ps, BasisKind::CrossIsotropicPair)
    }

    /// {Φ, 1 − Φ} between Alice's input and Bob's output of a point-to-point channel.
    pub fn single_isotropic(d: usize) -> Result<Self> {
        let (p, q) = phi_pair(d, (A0, B1))?;
        let dims = [(A0, d), (B0, 1), (A1, 1), (B1, d)];
        Self::new(vec![to_canonical(p, dims)?, to_canonical(q, dims)?], BasisKind::SingleIsotropic)
    }

    /// Rank-one projectors onto the computational basis.
    pub fn diagonal(system: &RegisterSystem) -> Result<Self> {
        let ps = (0..system.dim())
            .map(|i| LabeledMatrix::basis_projector(system.clone(), i))
            .collect::<Result<Vec<_>>>()?;
        Self::new(ps, BasisKind::Diagonal)
    }

    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }

    pub fn system(&self) -> &RegisterSystem {
        self.projectors[0].system()
    }

    pub fn shape(&self) -> VarShape {
        VarShape::Span(self.projectors.clone())
    }

    /// Σ cᵢ Pᵢ
    pub fn combine(&self, coeffs: &[f64]) -> Result<LabeledMatrix> {
        if coeffs.len() != self.len() {
            return Err(Error::dims("one coefficient per projector"));
        }
        let mut out = LabeledMatrix::zeros(self.system().clone());
        for (c, p) in coeffs.iter().zip(&self.projectors) {
            out = out.add(&p.scale(*c))?;
        }
        Ok(out)
    }
}

/// Tester restricted to the span of `basis`, with maximally mixed probe states.
pub fn invariant_tester_shape(basis: &CommutantBasis, input: &RegisterSystem) -> TesterShape {
    let mixed = VarShape::Span(vec![LabeledMatrix::identity(input.clone())]);
    TesterShape { w: basis.shape(), q: basis.shape(), rho: mixed.clone(), sigma: mixed }
}

/// Average of Γ X Γ† over the given unitaries.
pub fn twirl_finite(x: &LabeledMatrix, gammas: &[DMatrix<C64>]) -> Result<LabeledMatrix> {
    if gammas.is_empty() {
        return Err(Error::param("twirl over an empty set"));
    }
    let mut acc = LabeledMatrix::zeros(x.system().clone());
    for g in gammas {
        acc = acc.add(&x.conjugate_by(g)?)?;
    }
    Ok(acc.scale(1.0 / gammas.len() as f64))
}

/// cᵢ = tr(Pᵢ X) / tr(Pᵢ), so that Σ cᵢ Pᵢ is the orthogonal projection of X.
pub fn commutant_project(x: &LabeledMatrix, basis: &CommutantBasis) -> Result<Vec<f64>> {
    basis
        .projectors
        .iter()
        .map(|p| Ok(p.trace_product(x)? / p.trace().re))
        .collect()
}

/// Support pattern of operators invariant under diagonal phases: entry (i, j)
/// survives when both basis states carry the same charge.
pub fn charge_support<F>(system: &RegisterSystem, charge: F) -> Vec<(usize, usize)>
where
    F: Fn(usize) -> Vec<i64>,
{
    let n = system.dim();
    let charges: Vec<Vec<i64>> = (0..n).map(charge).collect();
    let mut out = Vec::new();
    for i in 0..n {
        for j in i..n {
            if charges[i] == charges[j] {
                out.push((i, j));
            }
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub value: f64,
    pub vars: Vec<(String, f64)>,
}

impl LpSolution {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.vars.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }
}

/// Small LP over scalars built on the conic layer with 1×1 blocks.
struct Lp {
    prog: ConicProgram,
    vars: Vec<Var>,
    count: usize,
}

impl Lp {
    fn new(names: &[&str]) -> Self {
        let mut prog = ConicProgram::new();
        let vars = names.iter().map(|n| prog.add_scalar(n)).collect();
        Lp { prog, vars, count: 0 }
    }

    fn var(&self, i: usize) -> Expr {
        self.vars[i].expr()
    }

    /// Σ coeffs·vars + c
    fn form(&self, coeffs: &[(usize, f64)], c: f64) -> Result<Expr> {
        let mut e = Expr::scalar(c);
        for &(i, a) in coeffs {
            e = e.add(self.var(i).scale(a))?;
        }
        Ok(e)
    }

    fn le(&mut self, a: Expr, b: Expr) -> Result<()> {
        self.count += 1;
        let name = format!("c{}", self.count);
        self.prog.psd(&name, b.sub(a)?)
    }

    fn between(&mut self, i: usize, lo: f64, hi: f64) -> Result<()> {
        self.le(Expr::scalar(lo), self.var(i))?;
        self.le(self.var(i), Expr::scalar(hi))
    }

    /// (1 − k) μ ≤ λ ≤ (1 + k) μ and the same for c − λ against c − μ.
    fn sandwich(&mut self, lam: Expr, mu: Expr, k: f64, c: f64) -> Result<()> {
        self.le(mu.clone().scale(1.0 - k), lam.clone())?;
        self.le(lam.clone(), mu.clone().scale(1.0 + k))?;
        let lc = Expr::scalar(c).sub(lam)?;
        let mc = Expr::scalar(c).sub(mu)?;
        self.le(mc.clone().scale(1.0 - k), lc.clone())?;
        self.le(lc, mc.scale(1.0 + k))
    }

    fn maximize(mut self, objective: Expr, opts: &SolveOptions) -> Result<LpSolution> {
        self.prog.maximize(objective)?;
        let sol = self.prog.solve(opts)?.require_optimal()?;
        let vars = self.vars.iter().map(|v| (v.name().to_string(), sol.scalar_of(v))).collect();
        Ok(LpSolution { value: sol.value, vars })
    }
}

fn check_probs(p: f64, q: f64) -> Result<()> {
    for (n, x) in [("p", p), ("q", q)] {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::param(format!("{n} = {x} outside [0, 1]")));
        }
    }
    Ok(())
}

/// Equiprobable k-injectable PPT discrimination of two bipartite depolarizing
/// channels, with tester coefficients x, y and u, v on Φ⊗Φ and its complement.
pub fn lp_bipartite_depol(da: usize, db: usize, p: f64, q: f64, k: usize, opts: &SolveOptions) -> Result<LpSolution> {
    check_probs(p, q)?;
    check_k(k)?;
    let d = (da * db) as f64;
    let c = 1.0 / d;
    let kf = k as f64;
    let mut lp = Lp::new(&["x", "y", "u", "v"]);
    for i in 0..4 {
        lp.between(i, 0.0, c)?;
    }
    lp.sandwich(lp.var(0), lp.var(2), kf, c)?;
    lp.sandwich(lp.var(1), lp.var(3), kf, c)?;
    let s = 0.5 * (p - q) * (d - 1.0 / d);
    let obj = lp.form(&[(0, s), (1, -s)], 0.5)?;
    lp.maximize(obj, opts)
}

/// The same program with one coefficient per commutant projector.
pub fn lp_bipartite_depol_full(da: usize, db: usize, p: f64, q: f64, k: usize, opts: &SolveOptions) -> Result<LpSolution> {
    check_probs(p, q)?;
    check_k(k)?;
    let d = (da * db) as f64;
    let (a2, b2) = ((da * da) as f64 - 1.0, (db * db) as f64 - 1.0);
    let c = 1.0 / d;
    let kf = k as f64;
    let mut lp = Lp::new(&["w1", "w2", "w3", "w4", "q1", "q2", "q3", "q4"]);
    for i in 0..8 {
        lp.between(i, 0.0, c)?;
    }
    for i in 0..4 {
        lp.sandwich(lp.var(i), lp.var(i + 4), kf, c)?;
    }
    let h = 0.5 * (p - q);
    let obj = lp.form(&[(0, h * (d * d - 1.0) / d), (1, -h * b2 / d), (2, -h * a2 / d), (3, -h * a2 * b2 / d)], 0.5)?;
    lp.maximize(obj, opts)
}

/// Equiprobable discrimination of two d-dimensional point-to-point depolarizing channels.
pub fn lp_pp_depol(d: usize, p: f64, q: f64, k: usize, opts: &SolveOptions) -> Result<LpSolution> {
    check_probs(p, q)?;
    check_k(k)?;
    let df = d as f64;
    let c = 1.0 / df;
    let kf = k as f64;
    let mut lp = Lp::new(&["x", "y", "u", "v"]);
    for i in 0..4 {
        lp.between(i, 0.0, c)?;
    }
    for s in [1.0, -1.0] {
        // y ± (x − y)/d, v ± (u − v)/d
        let lam = lp.form(&[(0, s / df), (1, 1.0 - s / df)], 0.0)?;
        let mu = lp.form(&[(2, s / df), (3, 1.0 - s / df)], 0.0)?;
        lp.sandwich(lam, mu, kf, c)?;
    }
    let h = 0.5 * (p - q) * (df - 1.0 / df);
    let obj = lp.form(&[(0, h), (1, -h)], 0.5)?;
    lp.maximize(obj, opts)
}

/// Coefficients of λ_{s1,s2} = w4 + s1 (w2 − w4)/d + s2 (w3 − w4)/d + s1 s2 (w1 − w2 − w3 + w4)/d²
/// on (w1, w2, w3, w4): the eigenvalues of W^{T_B} on the joint swap eigenspaces.
pub fn swap_eigen_coeffs(d: usize, s1: f64, s2: f64) -> [f64; 4] {
    let df = d as f64;
    let t = s1 * s2 / (df * df);
    [t, s1 / df - t, s2 / df - t, 1.0 - s1 / df - s2 / df + t]
}

/// Equiprobable discrimination of two depolarized swap channels.
pub fn lp_depol_swap(d: usize, p: f64, q: f64, k: usize, opts: &SolveOptions) -> Result<LpSolution> {
    if d < 2 {
        return Err(Error::param("depolarized swap LP needs d >= 2"));
    }
    check_probs(p, q)?;
    check_k(k)?;
    let df = d as f64;
    let d2 = df * df;
    let c = 1.0 / d2;
    let kf = k as f64;
    let mut lp = Lp::new(&["w1", "w2", "w3", "w4", "q1", "q2", "q3", "q4"]);
    for i in 0..8 {
        lp.between(i, 0.0, c)?;
    }
    for s1 in [1.0, -1.0] {
        for s2 in [1.0, -1.0] {
            let e = swap_eigen_coeffs(d, s1, s2);
            let lam = lp.form(&[(0, e[0]), (1, e[1]), (2, e[2]), (3, e[3])], 0.0)?;
            let mu = lp.form(&[(4, e[0]), (5, e[1]), (6, e[2]), (7, e[3])], 0.0)?;
            lp.sandwich(lam, mu, kf, c)?;
        }
    }
    let h = 0.5 * (p - q);
    let obj = lp.form(
        &[(0, h * (d2 - 1.0 / d2)), (1, -h * (d2 - 1.0) / d2), (2, -h * (d2 - 1.0) / d2), (3, -h * (d2 - 1.0).powi(2) / d2)],
        0.5,
    )?;
    lp.maximize(obj, opts)
}

fn check_diagonal(c: &ChoiOperator) -> Result<()> {
    let m = c.matrix().entries();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if i != j && m[(i, j)].norm() > 1e-12 {
                return Err(Error::param("Choi operator is not diagonal in the computational basis"));
            }
        }
    }
    Ok(())
}

/// Optimal success probability for channels classical in the computational
/// basis, as an LP over diagonal testers.
pub fn psucc_classical_diag(n: &ChoiOperator, m: &ChoiOperator, lambda: f64, opts: &SolveOptions) -> Result<f64> {
    if !n.same_shape(m) {
        return Err(Error::dims("channels must share register dimensions and ownership"));
    }
    check_diagonal(n)?;
    check_diagonal(m)?;
    let dj = n.matrix().scale(lambda).sub(&m.matrix().scale(1.0 - lambda))?;
    let (din, dout) = (n.d_in(), n.d_out());
    let mut names: Vec<String> = (0..din * dout).map(|i| format!("w{i}")).collect();
    names.extend((0..din).map(|a| format!("r{a}")));
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let mut lp = Lp::new(&refs);
    let r = |a: usize| din * dout + a;
    let mut obj = vec![];
    for i in 0..din * dout {
        lp.le(Expr::scalar(0.0), lp.var(i))?;
        lp.le(lp.var(i), lp.var(r(i / dout)))?;
        obj.push((i, dj.get(i, i).re));
    }
    let sum: Vec<(usize, f64)> = (0..din).map(|a| (r(a), 1.0)).collect();
    let total = lp.form(&sum, -1.0)?;
    lp.prog.zero("tr rho = 1", total)?;
    let obj = lp.form(&obj, 1.0 - lambda)?;
    Ok(lp.maximize(obj, opts)?.value)
}
