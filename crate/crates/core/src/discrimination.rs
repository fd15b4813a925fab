//! Success-probability programs for channel discrimination: unrestricted
//! testers, PPT testers assisted by a k-dimensional maximally entangled state,
//! their duals, and the worst case over sets of channels.

use crate::channel::{ChannelEnsemble, ChoiOperator, Party};
use crate::conic::{ConicProgram, Expr, SolveOptions, Var, VarShape};
use crate::error::{Error, Result};
use crate::tensor::{LabeledMatrix, RegisterSystem};

pub fn check_k(k: usize) -> Result<()> {
    if k < 1 {
        return Err(Error::param("k must be ≥ 1"));
    }
    Ok(())
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::param(format!("prior {lambda} outside [0, 1]")));
    }
    Ok(())
}

fn check_pair(n: &ChoiOperator, m: &ChoiOperator) -> Result<()> {
    if !n.same_shape(m) {
        return Err(Error::dims("channels must share register dimensions and ownership"));
    }
    Ok(())
}

/// λ J^N − (1 − λ) J^M
pub fn weighted_difference(n: &ChoiOperator, m: &ChoiOperator, lambda: f64) -> Result<LabeledMatrix> {
    n.matrix().scale(lambda).sub(&m.matrix().scale(1.0 - lambda))
}

fn ident(s: &RegisterSystem) -> Result<Expr> {
    Expr::constant(LabeledMatrix::identity(s.clone()))
}

fn trace_one(p: &mut ConicProgram, name: &str, v: &Var) -> Result<()> {
    p.zero(name, v.expr().trace()?.sub(Expr::scalar(1.0))?)
}

#[derive(Clone, Debug)]
pub struct GlobalSolution {
    pub value: f64,
    pub dual_value: f64,
    pub rho: LabeledMatrix,
    /// One tester element per channel, summing to ρ ⊗ 1.
    pub testers: Vec<LabeledMatrix>,
}

/// Optimal success probability with unrestricted (entangled) testers.
pub fn psucc_global(ens: &ChannelEnsemble, opts: &SolveOptions) -> Result<GlobalSolution> {
    psucc_global_shaped(ens, &TesterShape::default(), opts)
}

/// As [`psucc_global`] with the tester elements restricted to `shape.w` and the probe to `shape.rho`.
pub fn psucc_global_shaped(ens: &ChannelEnsemble, shape: &TesterShape, opts: &SolveOptions) -> Result<GlobalSolution> {
    let first = &ens.channels()[0];
    let sys = first.system().clone();
    let outputs = first.output_system();
    let mut p = ConicProgram::new();
    let rho = add_shaped(&mut p, "rho", first.input_system(), &shape.rho)?;
    trace_one(&mut p, "tr rho = 1", &rho)?;
    let m = ens.len();
    let mut ts = Vec::with_capacity(m);
    let mut rest = rho.expr().kron_identity(&outputs)?;
    let mut objective = Expr::scalar(0.0);
    for (j, (c, &pj)) in ens.channels().iter().zip(ens.probs()).enumerate() {
        if j + 1 < m {
            let t = add_shaped(&mut p, &format!("T{j}"), sys.clone(), &shape.w)?;
            p.psd(&format!("T{j} >= 0"), t.expr())?;
            rest = rest.sub(t.expr())?;
            objective = objective.add(t.expr().trace_against(&c.matrix().scale(pj))?)?;
            ts.push(t);
        } else {
            p.psd(&format!("T{j} >= 0"), rest.clone())?;
            objective = objective.add(rest.clone().trace_against(&c.matrix().scale(pj))?)?;
        }
    }
    p.maximize(objective)?;
    let sol = p.solve(opts)?.require_optimal()?;
    let rho_v = sol.value_of(&rho).clone();
    let mut testers: Vec<LabeledMatrix> = ts.iter().map(|t| sol.value_of(t).clone()).collect();
    let mut last = rho_v.kron(&LabeledMatrix::identity(outputs))?;
    for t in &testers {
        last = last.sub(t)?;
    }
    testers.push(last);
    Ok(GlobalSolution { value: sol.value, dual_value: sol.dual_value, rho: rho_v, testers })
}

/// Binary convenience wrapper.
pub fn psucc_global_pair(n: &ChoiOperator, m: &ChoiOperator, lambda: f64, opts: &SolveOptions) -> Result<f64> {
    Ok(psucc_global(&ChannelEnsemble::binary(n.clone(), m.clone(), lambda)?, opts)?.value)
}

/// Dual form of the unrestricted value: 1 − λ + min α subject to
/// C ⪰ 0, C ⪰ λJ^N − (1−λ)J^M and tr_out C ⪯ α 1.
pub fn diamond_dual(n: &ChoiOperator, m: &ChoiOperator, lambda: f64, opts: &SolveOptions) -> Result<f64> {
    check_pair(n, m)?;
    check_lambda(lambda)?;
    let dj = weighted_difference(n, m, lambda)?;
    let mut p = ConicProgram::new();
    let c = p.add_var("C", n.system().clone());
    let alpha = p.add_scalar("alpha");
    p.psd("C >= 0", c.expr())?;
    p.psd("C >= D", c.expr().sub(Expr::constant(dj)?)?)?;
    let tr = c.expr().partial_trace(n.outputs())?;
    p.psd("alpha 1 >= tr_out C", alpha.expr().kron_identity(&n.input_system())?.sub(tr)?)?;
    p.minimize(alpha.expr().add(Expr::scalar(1.0 - lambda))?)?;
    Ok(p.solve(opts)?.require_optimal()?.value)
}

/// Restrictions on the PPT tester variables, e.g. to a symmetry-invariant subspace.
#[derive(Clone, Debug)]
pub struct TesterShape {
    pub w: VarShape,
    pub q: VarShape,
    pub rho: VarShape,
    pub sigma: VarShape,
}

impl Default for TesterShape {
    fn default() -> Self {
        TesterShape { w: VarShape::Full, q: VarShape::Full, rho: VarShape::Full, sigma: VarShape::Full }
    }
}

fn add_shaped(p: &mut ConicProgram, name: &str, system: RegisterSystem, shape: &VarShape) -> Result<Var> {
    match shape {
        VarShape::Full => Ok(p.add_var(name, system)),
        VarShape::Support(s) => p.add_var_with_support(name, system, s),
        VarShape::Span(b) => p.add_var_in_span(name, system, b.clone()),
    }
}

#[derive(Clone, Debug)]
pub struct PptVars {
    pub w: Var,
    pub q: Var,
    pub rho: Var,
    pub sigma: Var,
}

/// Adds the feasible set of k-injectable PPT testers for channels shaped like `template`.
pub fn add_ppt_tester(p: &mut ConicProgram, template: &ChoiOperator, k: usize, shape: &TesterShape) -> Result<PptVars> {
    check_k(k)?;
    let sys = template.system().clone();
    let outputs = template.output_system();
    let bob = template.labels_of(Party::Bob);
    let kf = k as f64;
    let w = add_shaped(p, "W", sys.clone(), &shape.w)?;
    let q = add_shaped(p, "Q", sys.clone(), &shape.q)?;
    let rho = add_shaped(p, "rho", template.input_system(), &shape.rho)?;
    let sigma = add_shaped(p, "sigma", template.input_system(), &shape.sigma)?;
    trace_one(p, "tr rho = 1", &rho)?;
    trace_one(p, "tr sigma = 1", &sigma)?;
    let rho1 = rho.expr().kron_identity(&outputs)?;
    let sigma1 = sigma.expr().kron_identity(&outputs)?;
    p.psd("W >= 0", w.expr())?;
    p.psd("rho 1 - W >= 0", rho1.clone().sub(w.expr())?)?;
    p.psd("Q >= 0", q.expr())?;
    p.psd("sigma 1 - Q >= 0", sigma1.clone().sub(q.expr())?)?;
    let wt = w.expr().partial_transpose(&bob)?;
    let qt = q.expr().partial_transpose(&bob)?;
    p.psd("W^TB - (1-k) Q^TB >= 0", wt.clone().sub(qt.clone().scale(1.0 - kf))?)?;
    p.psd("(1+k) Q^TB - W^TB >= 0", qt.clone().scale(1.0 + kf).sub(wt.clone())?)?;
    let wc = rho1.partial_transpose(&bob)?.sub(wt)?;
    let qc = sigma1.partial_transpose(&bob)?.sub(qt)?;
    p.psd("complement lower", wc.clone().sub(qc.clone().scale(1.0 - kf))?)?;
    p.psd("complement upper", qc.scale(1.0 + kf).sub(wc)?)?;
    Ok(PptVars { w, q, rho, sigma })
}

#[derive(Clone, Debug)]
pub struct TesterSolution {
    pub value: f64,
    pub dual_value: f64,
    pub w: LabeledMatrix,
    pub q: LabeledMatrix,
    pub rho: LabeledMatrix,
    pub sigma: LabeledMatrix,
}

/// Optimal success probability with PPT testers injecting a k-dimensional
/// maximally entangled state; N has prior λ.
pub fn psucc_ppt_k(n: &ChoiOperator, m: &ChoiOperator, lambda: f64, k: usize, opts: &SolveOptions) -> Result<TesterSolution> {
    psucc_ppt_k_shaped(n, m, lambda, k, &TesterShape::default(), opts)
}

pub fn psucc_ppt_k_shaped(
    n: &ChoiOperator,
    m: &ChoiOperator,
    lambda: f64,
    k: usize,
    shape: &TesterShape,
    opts: &SolveOptions,
) -> Result<TesterSolution> {
    check_pair(n, m)?;
    check_lambda(lambda)?;
    let mut p = ConicProgram::new();
    let v = add_ppt_tester(&mut p, n, k, shape)?;
    let dj = weighted_difference(n, m, lambda)?;
    p.maximize(v.w.expr().trace_against(&dj)?.add(Expr::scalar(1.0 - lambda))?)?;
    let sol = p.solve(opts)?.require_optimal()?;
    Ok(TesterSolution {
        value: sol.value,
        dual_value: sol.dual_value,
        w: sol.value_of(&v.w).clone(),
        q: sol.value_of(&v.q).clone(),
        rho: sol.value_of(&v.rho).clone(),
        sigma: sol.value_of(&v.sigma).clone(),
    })
}

/// Largest violation of the tester constraints, recomputed with dense tensor operations.
pub fn tester_violation(sol: &TesterSolution, template: &ChoiOperator, k: usize) -> Result<f64> {
    let kf = k as f64;
    let bob = template.labels_of(Party::Bob);
    let id = LabeledMatrix::identity(template.output_system());
    let rho1 = sol.rho.kron(&id)?;
    let sigma1 = sol.sigma.kron(&id)?;
    let wt = sol.w.partial_transpose(&bob)?;
    let qt = sol.q.partial_transpose(&bob)?;
    let wc = rho1.partial_transpose(&bob)?.sub(&wt)?;
    let qc = sigma1.partial_transpose(&bob)?.sub(&qt)?;
    let psd = [
        sol.w.clone(),
        rho1.sub(&sol.w)?,
        sol.q.clone(),
        sigma1.sub(&sol.q)?,
        wt.sub(&qt.scale(1.0 - kf))?,
        qt.scale(1.0 + kf).sub(&wt)?,
        wc.sub(&qc.scale(1.0 - kf))?,
        qc.scale(1.0 + kf).sub(&wc)?,
    ];
    let mut worst = (sol.rho.trace().re - 1.0).abs().max((sol.sigma.trace().re - 1.0).abs());
    for m in &psd {
        worst = worst.max((-m.min_eigenvalue()?).max(0.0));
    }
    Ok(worst)
}

/// The dual program: min 1 − λ + α + β over C, D, E, G, H, K ⪰ 0.
pub fn psucc_ppt_k_dual(n: &ChoiOperator, m: &ChoiOperator, lambda: f64, k: usize, opts: &SolveOptions) -> Result<f64> {
    check_pair(n, m)?;
    check_lambda(lambda)?;
    let dj = Expr::constant(weighted_difference(n, m, lambda)?)?;
    let mut p = ConicProgram::new();
    add_ppt_dual(&mut p, n, k, dj)?;
    Ok(p.solve(opts)?.require_optimal()?.value + 1.0 - lambda)
}

/// Adds the dual variables and constraints with `dj` standing for λJ^N − (1−λ)J^M, and the objective.
fn add_ppt_dual(p: &mut ConicProgram, template: &ChoiOperator, k: usize, dj: Expr) -> Result<()> {
    check_k(k)?;
    let kf = k as f64;
    let sys = template.system().clone();
    let bob = template.labels_of(Party::Bob);
    let bob_in = template.inputs_of(Party::Bob);
    let outs = template.outputs();
    let insys = template.input_system();
    let names = ["C", "D", "E", "G", "H", "K"];
    let v: Vec<Var> = names.iter().map(|nm| p.add_var(nm, sys.clone())).collect();
    for (var, nm) in v.iter().zip(names) {
        p.psd(&format!("{nm} >= 0"), var.expr())?;
    }
    let (c, d, e, g, h, kk) = (&v[0], &v[1], &v[2], &v[3], &v[4], &v[5]);
    let alpha = p.add_scalar("alpha");
    let beta = p.add_scalar("beta");
    let tb = |x: &Var| x.expr().partial_transpose(&bob);
    // λJN − (1−λ)JM − C ⪯ H^TB − E^TB + G^TB − K^TB
    let rhs = tb(h)?.sub(tb(e)?)?.add(tb(g)?)?.sub(tb(kk)?)?.add(c.expr())?;
    p.psd("W multiplier", rhs.sub(dj)?)?;
    // (1+k)(G^TB − K^TB) + (1−k)(H^TB − E^TB) ⪯ D
    let lhs = tb(g)?.sub(tb(kk)?)?.scale(1.0 + kf).add(tb(h)?.sub(tb(e)?)?.scale(1.0 - kf))?;
    p.psd("Q multiplier", d.expr().sub(lhs)?)?;
    let tb0 = |x: &Var| -> Result<Expr> {
        if bob_in.is_empty() {
            Ok(x.expr())
        } else {
            x.expr().partial_transpose(&bob_in)
        }
    };
    let ra = c.expr().add(tb0(h)?)?.sub(tb0(kk)?)?.partial_trace(outs)?;
    p.psd("rho multiplier", alpha.expr().kron_identity(&insys)?.sub(ra)?)?;
    let rb = d.expr().add(tb0(h)?.scale(kf - 1.0))?.add(tb0(kk)?.scale(kf + 1.0))?.partial_trace(outs)?;
    p.psd("sigma multiplier", beta.expr().kron_identity(&insys)?.sub(rb)?)?;
    // the prior enters through the constant of dj; 1 − λ is added by the caller
    p.minimize(alpha.expr().add(beta.expr())?)?;
    Ok(())
}

/// Same value as [`psucc_ppt_k`], from the four-operator formulation with
/// separate tester elements for each outcome.
pub fn psucc_ppt_k_split(n: &ChoiOperator, m: &ChoiOperator, lambda: f64, k: usize, opts: &SolveOptions) -> Result<f64> {
    check_pair(n, m)?;
    check_lambda(lambda)?;
    check_k(k)?;
    let kf = k as f64;
    let sys = n.system().clone();
    let outs = n.outputs();
    let outsys = n.output_system();
    let dout = outsys.dim() as f64;
    let pi = LabeledMatrix::maximally_mixed(outsys);
    let bob = n.labels_of(Party::Bob);
    let mut p = ConicProgram::new();
    let w: Vec<Var> = (0..2).map(|j| p.add_var(&format!("W{j}"), sys.clone())).collect();
    let q: Vec<Var> = (0..2).map(|j| p.add_var(&format!("Q{j}"), sys.clone())).collect();
    for (a, b) in [(&w, "W"), (&q, "Q")] {
        let sum = a[0].expr().add(a[1].expr())?;
        p.psd(&format!("{b}0 >= 0"), a[0].expr())?;
        p.psd(&format!("{b}1 >= 0"), a[1].expr())?;
        p.zero(&format!("tr {b} = d_out"), sum.clone().trace()?.sub(Expr::scalar(dout))?)?;
        let marg = sum.clone().partial_trace(outs)?.kron_right(&pi)?;
        p.zero(&format!("{b} no-signalling"), sum.sub(marg)?)?;
    }
    for j in 0..2 {
        let wt = w[j].expr().partial_transpose(&bob)?;
        let qt = q[j].expr().partial_transpose(&bob)?;
        p.psd(&format!("lower {j}"), wt.clone().sub(qt.clone().scale(1.0 - kf))?)?;
        p.psd(&format!("upper {j}"), qt.scale(1.0 + kf).sub(wt)?)?;
    }
    let obj = w[0]
        .expr()
        .trace_against(&n.matrix().scale(lambda))?
        .add(w[1].expr().trace_against(&m.matrix().scale(1.0 - lambda))?)?;
    p.maximize(obj)?;
    Ok(p.solve(opts)?.require_optimal()?.value)
}

/// k-injectable PPT discrimination of two states on `system`, where Bob holds `bob`.
pub fn psucc_ppt_states<S: AsRef<str>>(
    rho: &LabeledMatrix,
    sigma: &LabeledMatrix,
    bob: &[S],
    lambda: f64,
    k: usize,
    opts: &SolveOptions,
) -> Result<f64> {
    check_k(k)?;
    check_lambda(lambda)?;
    let sys = rho.system().clone();
    let sigma = rho.align(sigma)?;
    let kf = k as f64;
    let mut p = ConicProgram::new();
    let w: Vec<Var> = (0..2).map(|j| p.add_var(&format!("W{j}"), sys.clone())).collect();
    let q: Vec<Var> = (0..2).map(|j| p.add_var(&format!("Q{j}"), sys.clone())).collect();
    for (a, b) in [(&w, "W"), (&q, "Q")] {
        p.psd(&format!("{b}0 >= 0"), a[0].expr())?;
        p.psd(&format!("{b}1 >= 0"), a[1].expr())?;
        p.zero(&format!("{b}0 + {b}1 = 1"), a[0].expr().add(a[1].expr())?.sub(ident(&sys)?)?)?;
    }
    for j in 0..2 {
        let wt = w[j].expr().partial_transpose(bob)?;
        let qt = q[j].expr().partial_transpose(bob)?;
        p.psd(&format!("lower {j}"), wt.clone().sub(qt.clone().scale(1.0 - kf))?)?;
        p.psd(&format!("upper {j}"), qt.scale(1.0 + kf).sub(wt)?)?;
    }
    let obj = w[0]
        .expr()
        .trace_against(&rho.scale(lambda))?
        .add(w[1].expr().trace_against(&sigma.scale(1.0 - lambda))?)?;
    p.maximize(obj)?;
    Ok(p.solve(opts)?.require_optimal()?.value)
}

#[derive(Clone, Debug, PartialEq)]
pub enum ParamDomain {
    /// Independent intervals, one per direction.
    Box(Vec<(f64, f64)>),
    /// Nonnegative weights summing to one.
    Simplex,
}

/// The Choi operators J(θ) = base + Σ θ_i directions_i for θ in a domain.
#[derive(Clone, Debug)]
pub struct ParamChannelSet {
    pub base: LabeledMatrix,
    pub directions: Vec<LabeledMatrix>,
    pub domain: ParamDomain,
}

impl ParamChannelSet {
    pub fn singleton(c: &ChoiOperator) -> Self {
        ParamChannelSet { base: c.matrix().clone(), directions: Vec::new(), domain: ParamDomain::Box(Vec::new()) }
    }

    /// Convex hull of two channels; for channel families affine in a
    /// parameter this is the whole parameter interval.
    pub fn segment(a: &ChoiOperator, b: &ChoiOperator) -> Result<Self> {
        check_pair(a, b)?;
        Ok(ParamChannelSet {
            base: a.matrix().clone(),
            directions: vec![b.matrix().sub(a.matrix())?],
            domain: ParamDomain::Box(vec![(0.0, 1.0)]),
        })
    }

    /// Convex hull of several channels.
    pub fn hull(cs: &[ChoiOperator]) -> Result<Self> {
        let first = cs.first().ok_or_else(|| Error::param("empty channel set"))?;
        for c in cs {
            check_pair(first, c)?;
        }
        Ok(ParamChannelSet {
            base: LabeledMatrix::zeros(first.system().clone()),
            directions: cs.iter().map(|c| c.matrix().clone()).collect(),
            domain: ParamDomain::Simplex,
        })
    }

    fn validate(&self) -> Result<()> {
        match &self.domain {
            ParamDomain::Box(b) => {
                if b.len() != self.directions.len() {
                    return Err(Error::param("box domain needs one interval per direction"));
                }
                if b.iter().any(|&(lo, hi)| !(lo <= hi)) {
                    return Err(Error::param("empty parameter set"));
                }
            }
            ParamDomain::Simplex => {
                if self.directions.is_empty() {
                    return Err(Error::param("empty parameter set"));
                }
            }
        }
        Ok(())
    }

    /// Adds θ to `p` and returns the expression J(θ) scaled by `s`.
    fn member(&self, p: &mut ConicProgram, tag: &str, s: f64) -> Result<Expr> {
        self.validate()?;
        let mut e = Expr::constant(self.base.scale(s))?;
        let mut thetas = Vec::new();
        for (i, d) in self.directions.iter().enumerate() {
            let t = p.add_scalar(&format!("{tag}{i}"));
            e = e.add(t.expr().kron_right(&d.scale(s))?)?;
            thetas.push(t);
        }
        match &self.domain {
            ParamDomain::Box(b) => {
                for (t, &(lo, hi)) in thetas.iter().zip(b) {
                    p.psd("theta >= lo", t.expr().sub(Expr::scalar(lo))?)?;
                    p.psd("theta <= hi", Expr::scalar(hi).sub(t.expr())?)?;
                }
            }
            ParamDomain::Simplex => {
                let mut sum = Expr::scalar(-1.0);
                for t in &thetas {
                    p.psd("theta >= 0", t.expr())?;
                    sum = sum.add(t.expr())?;
                }
                p.zero("sum theta = 1", sum)?;
            }
        }
        Ok(e)
    }
}

/// Worst-case success probability over N ∈ set0 (prior λ), M ∈ set1, with
/// k-injectable PPT testers; `template` fixes registers and ownership.
pub fn composite_psucc(
    set0: &ParamChannelSet,
    set1: &ParamChannelSet,
    template: &ChoiOperator,
    lambda: f64,
    k: usize,
    opts: &SolveOptions,
) -> Result<f64> {
    check_lambda(lambda)?;
    for s in [set0, set1] {
        if template.matrix().align(&s.base)?.system() != template.system() {
            return Err(Error::dims("channel set does not match the template registers"));
        }
    }
    let mut p = ConicProgram::new();
    let jn = set0.member(&mut p, "theta_n", lambda)?;
    let jm = set1.member(&mut p, "theta_m", 1.0 - lambda)?;
    add_ppt_dual(&mut p, template, k, jn.sub(jm)?)?;
    let sol = p.solve(opts)?.require_optimal()?;
    Ok(sol.value + 1.0 - lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{amplitude_damping, depolarizing_pp, werner_holevo};

    fn opts() -> SolveOptions {
        SolveOptions::default()
    }

    #[test]
    fn identical_channels_give_the_prior() {
        let n = depolarizing_pp(2, 0.4).unwrap();
        for lambda in [0.5, 0.7] {
            let v = psucc_ppt_k(&n, &n, lambda, 1, &opts()).unwrap().value;
            assert!((v - lambda).abs() < 1e-6, "{v}");
        }
    }

    #[test]
    fn depolarizing_k1_closed_form() {
        let n = depolarizing_pp(2, 0.9).unwrap();
        let m = depolarizing_pp(2, 0.1).unwrap();
        let s = psucc_ppt_k(&n, &m, 0.5, 1, &opts()).unwrap();
        assert!((s.value - 0.7).abs() < 1e-6, "{}", s.value);
        assert!(tester_violation(&s, &n, 1).unwrap() < 1e-6);
        let g = psucc_global_pair(&n, &m, 0.5, &opts()).unwrap();
        assert!((g - 0.8).abs() < 1e-6, "{g}");
    }

    #[test]
    fn werner_holevo_bound() {
        let n = werner_holevo(3, 0).unwrap();
        let m = werner_holevo(3, 1).unwrap();
        let v = psucc_ppt_k(&n, &m, 0.5, 2, &opts()).unwrap().value;
        assert!(v <= 0.875 + 1e-6, "{v}");
    }

    #[test]
    fn dual_and_split_forms_agree() {
        let n = amplitude_damping(0.3).unwrap();
        let m = amplitude_damping(0.7).unwrap();
        for k in [1, 2] {
            let p = psucc_ppt_k(&n, &m, 0.6, k, &opts()).unwrap().value;
            let d = psucc_ppt_k_dual(&n, &m, 0.6, k, &opts()).unwrap();
            let s = psucc_ppt_k_split(&n, &m, 0.6, k, &opts()).unwrap();
            assert!((p - d).abs() < 1e-6, "{p} {d}");
            assert!((p - s).abs() < 1e-6, "{p} {s}");
        }
        let g = psucc_global_pair(&n, &m, 0.6, &opts()).unwrap();
        let dd = diamond_dual(&n, &m, 0.6, &opts()).unwrap();
        assert!((g - dd).abs() < 1e-6, "{g} {dd}");
    }

    #[test]
    fn singleton_composite_matches_pair() {
        let n = depolarizing_pp(2, 0.9).unwrap();
        let m = depolarizing_pp(2, 0.1).unwrap();
        let v = composite_psucc(&ParamChannelSet::singleton(&n), &ParamChannelSet::singleton(&m), &n, 0.5, 1, &opts()).unwrap();
        assert!((v - 0.7).abs() < 1e-6, "{v}");
        let wide = ParamChannelSet::segment(&n, &depolarizing_pp(2, 0.5).unwrap()).unwrap();
        let w = composite_psucc(&wide, &ParamChannelSet::singleton(&m), &n, 0.5, 1, &opts()).unwrap();
        assert!(w <= v + 1e-6);
    }

    #[test]
    fn rejects_k_zero() {
        let n = depolarizing_pp(2, 0.9).unwrap();
        let e = psucc_ppt_k(&n, &n, 0.5, 0, &opts()).unwrap_err();
        assert!(e.to_string().contains("k must be ≥ 1"));
    }
}
