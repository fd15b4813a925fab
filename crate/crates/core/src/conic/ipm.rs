//! Primal-dual path-following solver for real linear matrix inequalities.
//!
//! Standard form:
//!
//! ```text
//! minimize   c·y
//! subject to F_j(y) = F_j0 + sum_i y_i F_ji ⪰ 0   for every block j
//!            E y = e
//! ```
//!
//! with dual variables X_j ⪰ 0 and z satisfying sum_j <F_ji, X_j> + (Eᵀz)_i = c_i.
//! Search directions use the HKM scaling with a Mehrotra predictor-corrector;
//! the iterates may be infeasible until convergence.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};
use serde::Serialize;

use super::SolveStatus;
use crate::exec::{self, ExecMode};

/// Symmetric sparse matrix in triplet form with both triangles stored.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SymSparse {
    pub entries: Vec<(usize, usize, f64)>,
}

impl SymSparse {
    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn dot_dense(&self, m: &DMatrix<f64>) -> f64 {
        self.entries.iter().map(|&(r, c, v)| v * m[(r, c)]).sum()
    }

    pub fn add_to(&self, m: &mut DMatrix<f64>, s: f64) {
        for &(r, c, v) in &self.entries {
            m[(r, c)] += s * v;
        }
    }

    pub fn to_dense(&self, n: usize) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(n, n);
        self.add_to(&mut m, 1.0);
        m
    }

    pub fn frobenius(&self) -> f64 {
        self.entries.iter().map(|e| e.2 * e.2).sum::<f64>().sqrt()
    }
}

#[derive(Clone, Debug)]
pub struct LmiBlock {
    pub size: usize,
    pub constant: DMatrix<f64>,
    /// (variable index, coefficient matrix); each variable appears at most once.
    pub coeffs: Vec<(usize, SymSparse)>,
}

#[derive(Clone, Debug, Default)]
pub struct LmiProblem {
    pub num_vars: usize,
    pub objective: Vec<f64>,
    pub blocks: Vec<LmiBlock>,
    pub eq_rows: Vec<Vec<(usize, f64)>>,
    pub eq_rhs: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SolveOptions {
    pub feas_tol: f64,
    pub gap_tol: f64,
    pub max_iter: usize,
    #[serde(skip)]
    pub exec: ExecMode,
}

pub const MAX_ITER_ENV: &str = "CHANDISC_MAX_ITER";

impl Default for SolveOptions {
    fn default() -> Self {
        let max_iter = std::env::var(MAX_ITER_ENV)
            .ok()
            .and_then(|s| s.trim().parse().ok())
            .unwrap_or(100);
        SolveOptions { feas_tol: 1e-8, gap_tol: 1e-8, max_iter, exec: ExecMode::default() }
    }
}

impl SolveOptions {
    pub fn with_exec(mut self, exec: ExecMode) -> Self {
        self.exec = exec;
        self
    }
}

#[derive(Clone, Debug)]
pub struct IpmResult {
    pub status: SolveStatus,
    pub y: Vec<f64>,
    /// Dual matrices, one per block.
    pub x: Vec<DMatrix<f64>>,
    pub z: Vec<f64>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub iterations: usize,
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
    pub relative_gap: f64,
    pub detail: String,
}

/// Anything that can solve an [`LmiProblem`].
pub trait SdpBackend: Sync {
    fn solve(&self, problem: &LmiProblem, opts: &SolveOptions) -> IpmResult;
}

#[derive(Clone, Copy, Debug, Default)]
pub struct HkmSolver;

impl SdpBackend for HkmSolver {
    fn solve(&self, problem: &LmiProblem, opts: &SolveOptions) -> IpmResult {
        let first = Hkm::new(problem, opts, 1.0).run();
        if first.status != SolveStatus::NumericalTrouble {
            return first;
        }
        // a more interior start often recovers runs where μ collapsed early
        for scale in [100.0, 1e4] {
            let r = Hkm::new(problem, opts, scale).run();
            if r.status != SolveStatus::NumericalTrouble {
                return r;
            }
        }
        first
    }
}

/// Reduces equality rows to an independent set; `None` if they are inconsistent.
fn reduce_equalities(p: &LmiProblem) -> Option<(DMatrix<f64>, DVector<f64>)> {
    let m = p.num_vars;
    let rows = p.eq_rows.len();
    if rows == 0 {
        return Some((DMatrix::zeros(0, m), DVector::zeros(0)));
    }
    let mut a = DMatrix::zeros(rows, m + 1);
    for (r, row) in p.eq_rows.iter().enumerate() {
        for &(i, v) in row {
            a[(r, i)] += v;
        }
        a[(r, m)] = p.eq_rhs[r];
    }
    let scale = a.iter().fold(0.0f64, |s, v| s.max(v.abs())).max(1.0);
    let tol = 1e-11 * scale;
    let mut rank = 0;
    for col in 0..m {
        if rank == rows {
            break;
        }
        let (piv, best) = (rank..rows)
            .map(|r| (r, a[(r, col)].abs()))
            .fold((rank, 0.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best <= tol {
            continue;
        }
        a.swap_rows(rank, piv);
        let pv = a[(rank, col)];
        for r in 0..rows {
            if r != rank {
                let f = a[(r, col)] / pv;
                if f != 0.0 {
                    for c in col..=m {
                        let v = a[(rank, c)];
                        a[(r, c)] -= f * v;
                    }
                }
            }
        }
        rank += 1;
    }
    if (rank..rows).any(|r| a[(r, m)].abs() > 1e-9 * scale) {
        return None;
    }
    let e = a.view((0, 0), (rank, m)).into_owned();
    let rhs = DVector::from_fn(rank, |r, _| a[(r, m)]);
    Some((e, rhs))
}

fn sym(m: DMatrix<f64>) -> DMatrix<f64> {
    let t = m.transpose();
    (m + t) * 0.5
}

fn inner(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// Largest step t with X + t dX ⪰ 0 (infinite if every step is feasible).
fn max_step(chol: &Cholesky<f64, Dyn>, dx: &DMatrix<f64>) -> f64 {
    let n = dx.nrows();
    if n == 1 {
        let x = chol.l()[(0, 0)].powi(2);
        return if dx[(0, 0)] < 0.0 { -x / dx[(0, 0)] } else { f64::INFINITY };
    }
    let l = chol.l();
    let t = match l.solve_lower_triangular(dx) {
        Some(t) => t,
        None => return 0.0,
    };
    let t = match l.solve_lower_triangular(&t.transpose()) {
        Some(t) => t,
        None => return 0.0,
    };
    let lmin = SymmetricEigen::new(sym(t)).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if lmin >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / lmin
    }
}

struct Hkm<'a> {
    p: &'a LmiProblem,
    opts: &'a SolveOptions,
    e: DMatrix<f64>,
    e_rhs: DVector<f64>,
    /// For each variable, the (block, coefficient slot) pairs it appears in.
    var_blocks: Vec<Vec<(usize, usize)>>,
    /// Per block, per slot: dense copy for coefficient matrices with many entries.
    dense: Vec<Vec<Option<DMatrix<f64>>>>,
    n_total: usize,
    init_scale: f64,
}

struct Point {
    x: Vec<DMatrix<f64>>,
    s: Vec<DMatrix<f64>>,
    y: DVector<f64>,
    z: DVector<f64>,
}

impl<'a> Hkm<'a> {
    fn new(p: &'a LmiProblem, opts: &'a SolveOptions, init_scale: f64) -> Self {
        let mut var_blocks = vec![Vec::new(); p.num_vars];
        let mut dense = Vec::with_capacity(p.blocks.len());
        for (j, b) in p.blocks.iter().enumerate() {
            let mut d = Vec::with_capacity(b.coeffs.len());
            for (slot, (i, f)) in b.coeffs.iter().enumerate() {
                var_blocks[*i].push((j, slot));
                d.push((f.nnz() > 2 * b.size).then(|| f.to_dense(b.size)));
            }
            dense.push(d);
        }
        let n_total = p.blocks.iter().map(|b| b.size).sum();
        Hkm {
            p,
            opts,
            e: DMatrix::zeros(0, 0),
            e_rhs: DVector::zeros(0),
            var_blocks,
            dense,
            n_total,
            init_scale,
        }
    }

    /// sum_i y_i F_ji
    fn apply(&self, y: &DVector<f64>) -> Vec<DMatrix<f64>> {
        self.p
            .blocks
            .iter()
            .map(|b| {
                let mut m = DMatrix::zeros(b.size, b.size);
                for (i, f) in &b.coeffs {
                    if y[*i] != 0.0 {
                        f.add_to(&mut m, y[*i]);
                    }
                }
                m
            })
            .collect()
    }

    /// (sum_j <F_ji, G_j>)_i
    fn adjoint(&self, g: &[DMatrix<f64>]) -> DVector<f64> {
        let mut out = DVector::zeros(self.p.num_vars);
        for (j, b) in self.p.blocks.iter().enumerate() {
            for (i, f) in &b.coeffs {
                out[*i] += f.dot_dense(&g[j]);
            }
        }
        out
    }

    /// Schur complement M_il = sum_j tr(F_ji X_j F_jl S_j^-1).
    fn schur(&self, x: &[DMatrix<f64>], sinv: &[DMatrix<f64>]) -> DMatrix<f64> {
        let m = self.p.num_vars;
        let mut out = vec![0.0; m * m];
        exec::for_each_chunk_mut(self.opts.exec, &mut out, m.max(1), |i, row| {
            for &(j, slot) in &self.var_blocks[i] {
                let b = &self.p.blocks[j];
                let t = match &self.dense[j][slot] {
                    Some(fd) => &sinv[j] * (fd * &x[j]),
                    None => {
                        // T = S^-1 F_i X accumulated from rank-one pieces
                        let n = b.size;
                        let mut t = DMatrix::zeros(n, n);
                        for &(pr, qc, a) in &b.coeffs[slot].1.entries {
                            for c in 0..n {
                                let xv = a * x[j][(qc, c)];
                                if xv != 0.0 {
                                    for r in 0..n {
                                        t[(r, c)] += sinv[j][(r, pr)] * xv;
                                    }
                                }
                            }
                        }
                        t
                    }
                };
                for (l, f) in &b.coeffs {
                    let v: f64 = f.entries.iter().map(|&(r, s, w)| w * t[(s, r)]).sum();
                    row[*l] += v;
                }
            }
        });
        let mut mm = DMatrix::from_row_slice(m, m, &out);
        let t = mm.transpose();
        mm += t;
        mm *= 0.5;
        mm
    }

    fn run(mut self) -> IpmResult {
        let p = self.p;
        match reduce_equalities(p) {
            Some((e, rhs)) => {
                self.e = e;
                self.e_rhs = rhs;
            }
            None => return self.finish_early(SolveStatus::Infeasible, "inconsistent equality constraints"),
        }
        let c = DVector::from_vec(p.objective.clone());
        let norm_c = c.norm();
        let norm_f0 = p.blocks.iter().map(|b| b.constant.norm_squared()).sum::<f64>().sqrt();
        let norm_e = self.e_rhs.norm();

        let mut pt = self.initial_point(&c);
        let mut res = IpmResult {
            status: SolveStatus::NumericalTrouble,
            y: vec![],
            x: vec![],
            z: vec![],
            primal_objective: f64::NAN,
            dual_objective: f64::NAN,
            iterations: 0,
            primal_infeasibility: f64::INFINITY,
            dual_infeasibility: f64::INFINITY,
            relative_gap: f64::INFINITY,
            detail: String::new(),
        };
        let mut small_steps = 0;
        let mut last_dy = DVector::zeros(p.num_vars);
        for it in 0..=self.opts.max_iter {
            let ay = self.apply(&pt.y);
            let rp: Vec<DMatrix<f64>> = p
                .blocks
                .iter()
                .enumerate()
                .map(|(j, b)| &b.constant + &ay[j] - &pt.s[j])
                .collect();
            let re = &self.e_rhs - &self.e * &pt.y;
            let rd = &c - self.adjoint(&pt.x) - self.e.transpose() * &pt.z;
            let pobj = c.dot(&pt.y);
            let dobj = -p.blocks.iter().zip(&pt.x).map(|(b, x)| inner(&b.constant, x)).sum::<f64>()
                + self.e_rhs.dot(&pt.z);
            let xs: f64 = pt.x.iter().zip(&pt.s).map(|(x, s)| inner(x, s)).sum();
            let mu = xs / self.n_total.max(1) as f64;
            let pinf = (rp.iter().map(|r| r.norm_squared()).sum::<f64>() + re.norm_squared()).sqrt()
                / (1.0 + norm_f0 + norm_e);
            let dinf = rd.norm() / (1.0 + norm_c);
            let relgap = (pobj - dobj).abs().max(xs.abs()) / (1.0 + pobj.abs() + dobj.abs());

            res.iterations = it;
            res.primal_objective = pobj;
            res.dual_objective = dobj;
            res.primal_infeasibility = pinf;
            res.dual_infeasibility = dinf;
            res.relative_gap = relgap;

            if pinf <= self.opts.feas_tol && dinf <= self.opts.feas_tol && relgap <= self.opts.gap_tol {
                res.status = SolveStatus::Optimal;
                break;
            }
            // certificates: a diverging dual ray proves the LMI infeasible, a
            // diverging primal ray proves it unbounded below
            if dobj > 1e8 * (1.0 + norm_c) && self.is_dual_ray(&pt.x, &pt.z) {
                res.status = SolveStatus::Infeasible;
                res.detail = format!("dual ray with objective {dobj:.3e}");
                break;
            }
            if -pobj > 1e8 * (1.0 + norm_f0 + norm_e) && self.is_primal_ray(&c, &pt.y) {
                res.status = SolveStatus::Unbounded;
                res.detail = format!("primal ray with objective {pobj:.3e}");
                break;
            }
            if it == self.opts.max_iter {
                res.detail = format!(
                    "iteration limit {} reached (pinf {pinf:.2e}, dinf {dinf:.2e}, gap {relgap:.2e})",
                    self.opts.max_iter
                );
                break;
            }

            // hold μ while feasibility lags far behind complementarity
            let sigma_min = if pinf.max(dinf) > 100.0 * relgap.max(self.opts.gap_tol) { 0.5 } else { 0.0 };
            match self.step(&mut pt, &rp, &re, &rd, mu, sigma_min) {
                Ok((a, b, dy)) => {
                    last_dy = dy;
                    if a.min(b) < 1e-9 {
                        small_steps += 1;
                        if small_steps >= 3 {
                            res.detail = format!(
                                "stalled at iteration {it} (pinf {pinf:.2e}, dinf {dinf:.2e}, gap {relgap:.2e})"
                            );
                            break;
                        }
                    } else {
                        small_steps = 0;
                    }
                }
                Err(msg) => {
                    res.detail = format!("{msg} at iteration {it} (pinf {pinf:.2e}, dinf {dinf:.2e}, gap {relgap:.2e})");
                    break;
                }
            }
        }
        if res.status == SolveStatus::NumericalTrouble {
            if self.is_dual_ray(&pt.x, &pt.z) {
                res.status = SolveStatus::Infeasible;
            } else if self.is_primal_ray(&c, &pt.y) || self.is_primal_ray(&c, &last_dy) {
                res.status = SolveStatus::Unbounded;
            }
        }
        res.y = pt.y.iter().copied().collect();
        res.z = pt.z.iter().copied().collect();
        res.x = pt.x;
        res
    }

    /// X ⪰ 0 with A*(X) + Eᵀz ≈ 0 and -<F0, X> + e·z > 0.
    fn is_dual_ray(&self, x: &[DMatrix<f64>], z: &DVector<f64>) -> bool {
        let t = -self.p.blocks.iter().zip(x).map(|(b, x)| inner(&b.constant, x)).sum::<f64>() + self.e_rhs.dot(z);
        if !(t > 0.0) {
            return false;
        }
        let scale = x.iter().map(|m| m.norm_squared()).sum::<f64>().sqrt() + z.norm();
        if scale == 0.0 || t < 1e-6 * scale {
            return false;
        }
        let resid = (self.adjoint(x) + self.e.transpose() * z).norm();
        resid <= 1e-6 * t
    }

    /// A(r) ⪰ 0, E r = 0 and c·r < 0, up to tolerances relative to |c·r|.
    fn is_primal_ray(&self, c: &DVector<f64>, r: &DVector<f64>) -> bool {
        let nr = r.norm();
        if nr == 0.0 {
            return false;
        }
        let r = r / nr;
        let cr = c.dot(&r);
        if !(cr < -1e-6 * (1.0 + c.norm())) {
            return false;
        }
        if (&self.e * &r).norm() > 1e-6 * cr.abs() {
            return false;
        }
        self.apply(&r).into_iter().all(|m| {
            let lmin = if m.nrows() == 0 {
                0.0
            } else {
                SymmetricEigen::new(sym(m)).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
            };
            lmin >= -1e-6 * cr.abs()
        })
    }

    fn finish_early(&self, status: SolveStatus, detail: &str) -> IpmResult {
        IpmResult {
            status,
            y: vec![0.0; self.p.num_vars],
            x: self.p.blocks.iter().map(|b| DMatrix::zeros(b.size, b.size)).collect(),
            z: vec![],
            primal_objective: f64::NAN,
            dual_objective: f64::NAN,
            iterations: 0,
            primal_infeasibility: f64::INFINITY,
            dual_infeasibility: f64::INFINITY,
            relative_gap: f64::INFINITY,
            detail: detail.to_string(),
        }
    }

    fn initial_point(&self, c: &DVector<f64>) -> Point {
        let mut x = Vec::new();
        let mut s = Vec::new();
        for b in &self.p.blocks {
            let n = b.size as f64;
            let mut xi: f64 = 10.0f64.max(n.sqrt());
            let mut eta: f64 = 10.0f64.max(n.sqrt()).max(b.constant.norm());
            for (i, f) in &b.coeffs {
                let fnorm = f.frobenius();
                xi = xi.max(n * (1.0 + c[*i].abs()) / (1.0 + fnorm));
                eta = eta.max(fnorm);
            }
            x.push(DMatrix::identity(b.size, b.size) * (xi * self.init_scale));
            s.push(DMatrix::identity(b.size, b.size) * (eta * self.init_scale));
        }
        Point { x, s, y: DVector::zeros(self.p.num_vars), z: DVector::zeros(self.e.nrows()) }
    }

    /// One predictor-corrector step; returns the (primal, dual) step lengths taken.
    fn step(
        &self,
        pt: &mut Point,
        rp: &[DMatrix<f64>],
        re: &DVector<f64>,
        rd: &DVector<f64>,
        mu: f64,
        sigma_min: f64,
    ) -> Result<(f64, f64, DVector<f64>), String> {
        let nb = self.p.blocks.len();
        let mut chol_x = Vec::with_capacity(nb);
        let mut chol_s = Vec::with_capacity(nb);
        let mut sinv = Vec::with_capacity(nb);
        for j in 0..nb {
            let cx = Cholesky::new(pt.x[j].clone()).ok_or("dual iterate lost definiteness")?;
            let cs = Cholesky::new(pt.s[j].clone()).ok_or("slack iterate lost definiteness")?;
            sinv.push(sym(cs.inverse()));
            chol_x.push(cx);
            chol_s.push(cs);
        }
        let mut schur = self.schur(&pt.x, &sinv);
        let kkt = Kkt::factor(&mut schur, &self.e).ok_or("Schur complement is singular")?;

        // predictor
        let g: Vec<DMatrix<f64>> = (0..nb)
            .map(|j| -&pt.x[j] - sym(&pt.x[j] * &rp[j] * &sinv[j]))
            .collect();
        let h = self.adjoint(&g) - rd;
        let (dy, _) = kkt.solve(&h, re);
        let ady = self.apply(&dy);
        let ds_p: Vec<DMatrix<f64>> = (0..nb).map(|j| &rp[j] + &ady[j]).collect();
        let dx_p: Vec<DMatrix<f64>> = (0..nb)
            .map(|j| -&pt.x[j] - sym(&pt.x[j] * &ds_p[j] * &sinv[j]))
            .collect();
        let ap = (0..nb).map(|j| max_step(&chol_x[j], &dx_p[j])).fold(f64::INFINITY, f64::min).min(1.0);
        let bp = (0..nb).map(|j| max_step(&chol_s[j], &ds_p[j])).fold(f64::INFINITY, f64::min).min(1.0);
        let mu_aff: f64 = (0..nb)
            .map(|j| inner(&(&pt.x[j] + &dx_p[j] * ap), &(&pt.s[j] + &ds_p[j] * bp)))
            .sum::<f64>()
            / self.n_total.max(1) as f64;
        let ratio = (mu_aff / mu).clamp(0.0, 1.0);
        let expon = (3.0 * ap.min(bp).powi(2)).max(1.0);
        let sigma = ratio.powf(expon).clamp(sigma_min, 1.0);

        // corrector
        let g: Vec<DMatrix<f64>> = (0..nb)
            .map(|j| {
                &sinv[j] * (sigma * mu) - &pt.x[j] - sym(&pt.x[j] * &rp[j] * &sinv[j]) - sym(&dx_p[j] * &ds_p[j] * &sinv[j])
            })
            .collect();
        let h = self.adjoint(&g) - rd;
        let (dy, dz) = kkt.solve(&h, re);
        let ady = self.apply(&dy);
        let ds: Vec<DMatrix<f64>> = (0..nb).map(|j| &rp[j] + &ady[j]).collect();
        let dx: Vec<DMatrix<f64>> = (0..nb)
            .map(|j| {
                &sinv[j] * (sigma * mu) - &pt.x[j] - sym((&pt.x[j] * &ds[j] + &dx_p[j] * &ds_p[j]) * &sinv[j])
            })
            .collect();
        let gamma = 0.9 + 0.09 * ap.min(bp);
        let a = (0..nb).map(|j| max_step(&chol_x[j], &dx[j])).fold(f64::INFINITY, f64::min);
        let b = (0..nb).map(|j| max_step(&chol_s[j], &ds[j])).fold(f64::INFINITY, f64::min);
        let mut a = (gamma * a).min(1.0);
        let mut b = (gamma * b).min(1.0);
        // rounding near the boundary can leave a trial iterate indefinite
        let shrink = |base: &[DMatrix<f64>], dir: &[DMatrix<f64>], mut t: f64| -> f64 {
            for _ in 0..40 {
                if (0..nb).all(|j| Cholesky::new(&base[j] + &dir[j] * t).is_some()) {
                    return t;
                }
                t *= 0.5;
            }
            0.0
        };
        a = shrink(&pt.x, &dx, a);
        b = shrink(&pt.s, &ds, b);
        for j in 0..nb {
            pt.x[j] += &dx[j] * a;
            pt.s[j] += &ds[j] * b;
        }
        pt.z += dz * a;
        pt.y += &dy * b;
        Ok((a, b, dy))
    }
}

/// Factorization of the saddle system [[M, -Eᵀ], [E, 0]].
struct Kkt {
    m: Cholesky<f64, Dyn>,
    minv_et: DMatrix<f64>,
    k: Option<Cholesky<f64, Dyn>>,
    e: DMatrix<f64>,
}

impl Kkt {
    fn factor(m: &mut DMatrix<f64>, e: &DMatrix<f64>) -> Option<Self> {
        let n = m.nrows();
        let scale = (0..n).map(|i| m[(i, i)].abs()).fold(0.0, f64::max).max(1e-300);
        let mut chol = Cholesky::new(m.clone());
        let mut reg = 1e-15 * scale;
        while chol.is_none() && reg < 1e-6 * scale {
            let mut mr = m.clone();
            for i in 0..n {
                mr[(i, i)] += reg;
            }
            chol = Cholesky::new(mr);
            reg *= 100.0;
        }
        let chol = chol?;
        let minv_et = chol.solve(&e.transpose());
        let k = if e.nrows() > 0 {
            let km = e * &minv_et;
            let ks = (0..km.nrows()).map(|i| km[(i, i)].abs()).fold(0.0, f64::max).max(1e-300);
            let mut kc = Cholesky::new(km.clone());
            let mut reg = 1e-15 * ks;
            while kc.is_none() && reg < 1e-6 * ks {
                let mut kr = km.clone();
                for i in 0..kr.nrows() {
                    kr[(i, i)] += reg;
                }
                kc = Cholesky::new(kr);
                reg *= 100.0;
            }
            Some(kc?)
        } else {
            None
        };
        Some(Kkt { m: chol, minv_et, k, e: e.clone() })
    }

    /// Solves M dy - Eᵀ dz = h, E dy = r.
    fn solve(&self, h: &DVector<f64>, r: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        let minv_h = self.m.solve(h);
        match &self.k {
            None => (minv_h, DVector::zeros(0)),
            Some(k) => {
                let dz = k.solve(&(r - &self.e * &minv_h));
                let dy = minv_h + &self.minv_et * &dz;
                (dy, dz)
            }
        }
    }
}
