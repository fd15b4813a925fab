//! One-shot PPT entanglement cost: the smallest k whose k-injectable PPT
//! success probability reaches the unrestricted optimum.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::channel::ChoiOperator;
use crate::conic::{ConicProgram, Expr, SolveOptions};
use crate::discrimination::{
    add_ppt_tester, check_k, diamond_dual, psucc_global_pair, psucc_ppt_k_shaped, weighted_difference, TesterShape,
};
use crate::error::{Error, Result};
use crate::exec;

pub const DEFAULT_EQ_TOL: f64 = 1e-5;
/// Allowed disagreement between the primal and dual global values.
pub const GLOBAL_CHECK_TOL: f64 = 1e-6;

/// Level at which the hierarchy is guaranteed to have converged: 2 d_in² d_out − 1.
pub fn saturation_bound(c: &ChoiOperator) -> usize {
    2 * c.d_in() * c.d_in() * c.d_out() - 1
}

#[derive(Clone, Debug)]
pub struct CostOptions {
    pub eq_tol: f64,
    /// Scan limit; defaults to the saturation bound.
    pub k_max: Option<usize>,
    pub shape: TesterShape,
    pub solve: SolveOptions,
}

impl Default for CostOptions {
    fn default() -> Self {
        CostOptions { eq_tol: DEFAULT_EQ_TOL, k_max: None, shape: TesterShape::default(), solve: SolveOptions::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KEntry {
    pub k: usize,
    pub value: f64,
    pub gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub global_value: f64,
    pub per_k: Vec<KEntry>,
    pub k_star: Option<usize>,
    pub cost_bits: Option<f64>,
    pub k_max_used: usize,
    pub eq_tol: f64,
}

impl CostReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    /// Columns k, value, gap.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for e in &self.per_k {
            out.serialize(e)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Invariant(e.to_string()))
    }
}

/// Unrestricted optimum, confirmed by the dual program.
pub fn checked_global(n: &ChoiOperator, m: &ChoiOperator, lambda: f64, opts: &SolveOptions) -> Result<f64> {
    let primal = psucc_global_pair(n, m, lambda, opts)?;
    let dual = diamond_dual(n, m, lambda, opts)?;
    if (primal - dual).abs() > GLOBAL_CHECK_TOL {
        return Err(Error::Invariant(format!("global value {primal} disagrees with its dual {dual}")));
    }
    Ok(primal)
}

/// Scans k = 1, 2, ... in batches of one k per worker and stops at the first
/// level within `eq_tol` of the global value.
pub fn ent_cost_ppt(n: &ChoiOperator, m: &ChoiOperator, lambda: f64, opts: &CostOptions) -> Result<CostReport> {
    if !(opts.eq_tol > opts.solve.gap_tol) {
        return Err(Error::param("eq_tol must exceed the solver gap tolerance"));
    }
    let bound = saturation_bound(n);
    let k_max = opts.k_max.map_or(bound, |k| k.min(bound));
    check_k(k_max)?;
    let global = checked_global(n, m, lambda, &opts.solve)?;
    let batch = opts.solve.exec.workers().max(1);
    let mut per_k = Vec::new();
    let mut k_star = None;
    let mut next = 1;
    while next <= k_max && k_star.is_none() {
        let ks: Vec<usize> = (next..=(next + batch - 1).min(k_max)).collect();
        let values = exec::map(opts.solve.exec, &ks, |&k| {
            psucc_ppt_k_shaped(n, m, lambda, k, &opts.shape, &opts.solve).map(|s| s.value)
        });
        for (&k, v) in ks.iter().zip(values) {
            let value = v?;
            let gap = global - value;
            per_k.push(KEntry { k, value, gap });
            if gap <= opts.eq_tol {
                k_star = Some(k);
                break;
            }
        }
        next += ks.len();
    }
    if k_star.is_none() && k_max == bound {
        let last = per_k.last().map_or(f64::NAN, |e| e.gap);
        return Err(Error::Invariant(format!(
            "no level up to the saturation bound {bound} reached the global value {global} (last gap {last:.3e})"
        )));
    }
    Ok(CostReport {
        global_value: global,
        per_k,
        k_star,
        cost_bits: k_star.map(|k| (k as f64).log2()),
        k_max_used: k_max,
        eq_tol: opts.eq_tol,
    })
}

/// |P_ppt(k) − P_global|
pub fn gap_at_k(n: &ChoiOperator, m: &ChoiOperator, lambda: f64, k: usize, opts: &SolveOptions) -> Result<f64> {
    let global = checked_global(n, m, lambda, opts)?;
    let v = psucc_ppt_k_shaped(n, m, lambda, k, &TesterShape::default(), opts)?.value;
    Ok((global - v).abs())
}

/// The same gap as the optimum of min t subject to the tester constraints and
/// |tr[W(λJ^N − (1−λ)J^M)] − (P_global − (1 − λ))| ≤ t.
pub fn gap_at_k_min_t(n: &ChoiOperator, m: &ChoiOperator, lambda: f64, k: usize, opts: &SolveOptions) -> Result<f64> {
    let global = checked_global(n, m, lambda, opts)?;
    let target = global - (1.0 - lambda);
    let mut p = ConicProgram::new();
    let v = add_ppt_tester(&mut p, n, k, &TesterShape::default())?;
    let t = p.add_scalar("t");
    let dev = v.w.expr().trace_against(&weighted_difference(n, m, lambda)?)?.sub(Expr::scalar(target))?;
    p.psd("t - dev >= 0", t.expr().sub(dev.clone())?)?;
    p.psd("t + dev >= 0", t.expr().add(dev)?)?;
    p.minimize(t.expr())?;
    Ok(p.solve(opts)?.require_optimal()?.value)
}
