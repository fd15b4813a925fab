//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero when a check fails outside the documented open items.

use std::time::Instant;

use chandisc::channel::{
    amplitude_damping, classical, depolarized_swap, depolarizing_bipartite, depolarizing_pp, identity_channel,
    link_product, replacer, werner_holevo, ChannelDims, ChannelEnsemble, ChoiOperator, Party,
};
use chandisc::conic::SolveOptions;
use chandisc::cost::{ent_cost_ppt, saturation_bound, CostOptions};
use chandisc::discrimination::{
    composite_psucc, diamond_dual, psucc_global, psucc_global_pair, psucc_ppt_k, psucc_ppt_k_dual,
    psucc_ppt_k_shaped, tester_violation, ParamChannelSet, TesterShape,
};
use chandisc::experiments::{default_gamma_grid, fig5};
use chandisc::random::{random_channel, random_classical_channel, random_hermitian, random_pure, random_stochastic, Rng};
use chandisc::symmetry::{invariant_tester_shape, lp_bipartite_depol, lp_depol_swap, lp_pp_depol, CommutantBasis};
use chandisc::tensor::{LabeledMatrix, RegisterSystem};

type Pair = (ChoiOperator, ChoiOperator, f64, usize);

#[derive(Default)]
struct Check {
    failures: Vec<String>,
    /// Failures matching a documented open item; reported but tolerated.
    open: Vec<String>,
    notes: Vec<String>,
}

impl Check {
    fn expect(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.failures.push(what.into());
        }
    }

    fn close(&mut self, got: f64, want: f64, tol: f64, what: &str) {
        self.expect((got - want).abs() <= tol, format!("{what}: got {got:.10}, want {want:.10}"));
    }

    fn at_most(&mut self, got: f64, bound: f64, tol: f64, what: &str) {
        self.expect(got <= bound + tol, format!("{what}: {got:.10} exceeds {bound:.10}"));
    }

    fn run<F: FnOnce(&mut Check) -> chandisc::Result<()>>(f: F) -> Check {
        let mut c = Check::default();
        if let Err(e) = f(&mut c) {
            c.failures.push(format!("error: {e}"));
        }
        c
    }
}

fn opts() -> SolveOptions {
    SolveOptions::default()
}

fn sys(pairs: &[(&str, usize)]) -> RegisterSystem {
    RegisterSystem::from_pairs(pairs).unwrap()
}

fn criterion_1(c: &mut Check, suite: &mut Vec<Pair>) -> chandisc::Result<()> {
    let mut cases: Vec<(String, ChoiOperator, ChoiOperator, f64)> = Vec::new();
    for d in [2, 3] {
        cases.push((format!("werner-holevo d={d}"), werner_holevo(d, 0)?, werner_holevo(d, 1)?, (d as f64).log2()));
        for (p, q) in [(0.9, 0.1), (1.0, 0.5)] {
            cases.push((format!("pp depolarizing d={d} p={p} q={q}"), depolarizing_pp(d, p)?, depolarizing_pp(d, q)?, 1.0));
        }
    }
    cases.push(("bipartite depolarizing 2x2".into(), depolarizing_bipartite(2, 2, 0.9)?, depolarizing_bipartite(2, 2, 0.1)?, 0.0));
    cases.push(("depolarized swap d=2".into(), depolarized_swap(2, 0.9)?, depolarized_swap(2, 0.1)?, 1.0));
    for (name, n, m, want) in cases {
        let r = ent_cost_ppt(&n, &m, 0.5, &CostOptions::default())?;
        c.expect(r.cost_bits == Some(want), format!("{name}: cost {:?}, want {want}", r.cost_bits));
        for e in &r.per_k {
            suite.push((n.clone(), m.clone(), 0.5, e.k));
        }
    }
    Ok(())
}

fn criterion_2(c: &mut Check, suite: &mut Vec<Pair>) -> chandisc::Result<()> {
    let tuples = [(0.9, 0.1), (1.0, 0.5), (0.7, 0.25)];
    for d in [2usize, 3] {
        let df = d as f64;
        for &(p, q) in &tuples {
            let (n, m) = (depolarizing_pp(d, p)?, depolarizing_pp(d, q)?);
            for k in 1..=3 {
                let want = if k == 1 {
                    0.5 + (p - q) * (df - 1.0) / (2.0 * df)
                } else {
                    0.5 + (p - q) * (df * df - 1.0) / (2.0 * df * df)
                };
                let v = psucc_ppt_k(&n, &m, 0.5, k, &opts())?.value;
                c.close(v, want, 1e-6, &format!("pp depolarizing d={d} p={p} q={q} k={k}"));
                suite.push((n.clone(), m.clone(), 0.5, k));
            }

            // d = 3 bipartite and swap instances have 81×81 blocks; they are
            // solved on the commutant of their covariance group.
            let dd = df * df;
            let (n, m) = (depolarizing_bipartite(d, d, p)?, depolarizing_bipartite(d, d, q)?);
            let shape = if d == 2 {
                suite.push((n.clone(), m.clone(), 0.5, 1));
                TesterShape::default()
            } else {
                invariant_tester_shape(&CommutantBasis::isotropic_pair(d, d)?, &n.input_system())
            };
            let v = psucc_ppt_k_shaped(&n, &m, 0.5, 1, &shape, &opts())?.value;
            c.close(v, 0.5 + (p - q) * (dd * dd - 1.0) / (2.0 * dd * dd), 1e-6, &format!("bipartite depolarizing d={d} p={p} q={q} k=1"));

            let (n, m) = (depolarized_swap(d, p)?, depolarized_swap(d, q)?);
            let shape = if d == 2 {
                suite.push((n.clone(), m.clone(), 0.5, 1));
                suite.push((n.clone(), m.clone(), 0.5, 2));
                TesterShape::default()
            } else {
                invariant_tester_shape(&CommutantBasis::cross_isotropic(d)?, &n.input_system())
            };
            let v2 = psucc_ppt_k_shaped(&n, &m, 0.5, 2, &shape, &opts())?.value;
            c.close(v2, 0.5 + (p - q) / 2.0 * (dd * dd - 1.0) / (dd * dd), 1e-6, &format!("swap d={d} p={p} q={q} k=2"));
            let v1 = psucc_ppt_k_shaped(&n, &m, 0.5, 1, &shape, &opts())?.value;
            c.at_most(v1, 0.5 + (p - q) / 2.0 * (dd - 1.0) / dd, 1e-6, &format!("swap d={d} p={p} q={q} k=1"));
        }
        let (n, m) = (werner_holevo(d, 0)?, werner_holevo(d, 1)?);
        for lambda in [0.5, 0.3, (df + 1.0) / (2.0 * df)] {
            for k in 1..=d {
                let v = psucc_ppt_k(&n, &m, lambda, k, &opts())?.value;
                if k == d {
                    c.close(v, 1.0, 1e-6, &format!("werner-holevo d={d} lambda={lambda} k={k}"));
                } else {
                    let bound = 1.0 - lambda + lambda * (k as f64 + 1.0) / (df + 1.0);
                    c.at_most(v, bound, 1e-6, &format!("werner-holevo d={d} lambda={lambda} k={k}"));
                }
                suite.push((n.clone(), m.clone(), lambda, k));
            }
        }
    }
    Ok(())
}

fn criterion_3(c: &mut Check, suite: &mut Vec<Pair>) -> chandisc::Result<()> {
    let mut rng = Rng::seed(2024);
    let bip_dims = [(2, 2), (2, 1), (1, 2), (3, 1), (1, 3)];
    for (i, &(da, db)) in bip_dims.iter().enumerate() {
        let (p, q, k) = (rng.uniform(), rng.uniform(), 1 + rng.index(3));
        let lp = lp_bipartite_depol(da, db, p, q, k, &opts())?.value;
        let (n, m) = (depolarizing_bipartite(da, db, p)?, depolarizing_bipartite(da, db, q)?);
        let sdp = psucc_ppt_k(&n, &m, 0.5, k, &opts())?.value;
        c.close(lp, sdp, 1e-6, &format!("bipartite #{i} ({da},{db}) p={p:.4} q={q:.4} k={k}"));
        suite.push((n, m, 0.5, k));
    }
    for i in 0..5 {
        let (d, p, q, k) = (2 + rng.index(2), rng.uniform(), rng.uniform(), 1 + rng.index(3));
        let lp = lp_pp_depol(d, p, q, k, &opts())?.value;
        let (n, m) = (depolarizing_pp(d, p)?, depolarizing_pp(d, q)?);
        let sdp = psucc_ppt_k(&n, &m, 0.5, k, &opts())?.value;
        c.close(lp, sdp, 1e-6, &format!("pp #{i} d={d} p={p:.4} q={q:.4} k={k}"));
        suite.push((n, m, 0.5, k));
    }
    for i in 0..5 {
        let (p, q, k) = (rng.uniform(), rng.uniform(), 1 + rng.index(3));
        let lp = lp_depol_swap(2, p, q, k, &opts())?.value;
        let (n, m) = (depolarized_swap(2, p)?, depolarized_swap(2, q)?);
        let sdp = psucc_ppt_k(&n, &m, 0.5, k, &opts())?.value;
        c.close(lp, sdp, 1e-6, &format!("swap #{i} d=2 p={p:.4} q={q:.4} k={k}"));
        suite.push((n, m, 0.5, k));
    }
    Ok(())
}

fn criterion_4(c: &mut Check, suite: &[Pair]) -> chandisc::Result<()> {
    let mut seen: Vec<(f64, f64)> = Vec::new();
    for (n, m, lambda, k) in suite {
        let p = psucc_ppt_k(n, m, *lambda, *k, &opts())?.value;
        let d = psucc_ppt_k_dual(n, m, *lambda, *k, &opts())?;
        c.close(p, d, 1e-6, &format!("ppt primal/dual d_in={} k={k} lambda={lambda}", n.d_in()));
        let key = (n.matrix().frobenius_norm() + m.matrix().frobenius_norm(), *lambda);
        if !seen.iter().any(|s| (s.0 - key.0).abs() < 1e-12 && s.1 == key.1) {
            seen.push(key);
            let g = psucc_global_pair(n, m, *lambda, &opts())?;
            let dd = diamond_dual(n, m, *lambda, &opts())?;
            c.close(g, dd, 1e-6, &format!("global primal/dual d_in={} lambda={lambda}", n.d_in()));
        }
    }
    c.notes.push(format!("{} ppt instances, {} global instances", suite.len(), seen.len()));
    Ok(())
}

fn criterion_5(c: &mut Check) -> chandisc::Result<()> {
    let grid = default_gamma_grid();
    for copies in 1..=3 {
        let rows = fig5(&grid, copies, &opts())?;
        for r in rows {
            let tag = format!("copies={copies} gamma={:.2}", r.gamma);
            if copies == 2 {
                c.close(r.p_k2, r.p_global, 1e-5, &format!("{tag} P_k2 vs P_global"));
                if r.gamma > 0.019 && r.gamma < 0.181 {
                    c.expect(r.p_global - r.p_k1 > 1e-4, format!("{tag}: P_global - P_k1 = {:.3e}", r.p_global - r.p_k1));
                }
            } else if (r.p_k1 - r.p_global).abs() > 1e-5 {
                let msg = format!("{tag}: P_global - P_k1 = {:.3e}", r.p_global - r.p_k1);
                // open item: at three copies and small damping the PPT value
                // without entanglement stays a few 1e-5 below the global one
                if copies == 3 && r.gamma < 0.05 && r.p_global - r.p_k1 < 5e-5 {
                    c.open.push(msg);
                } else {
                    c.failures.push(msg);
                }
            }
        }
    }
    Ok(())
}

fn criterion_6(c: &mut Check) -> chandisc::Result<()> {
    let mut rng = Rng::seed(6);
    for i in 0..50 {
        let (da, db, dc, dd) = (1 + rng.index(2), 1 + rng.index(3), 1 + rng.index(2), 1 + rng.index(2));
        let j1 = random_hermitian(sys(&[("A", da), ("B", db)]), &mut rng);
        let j2 = random_hermitian(sys(&[("B", db), ("C", dc)]), &mut rng);
        let j3 = random_hermitian(sys(&[("C", dc), ("D", dd)]), &mut rng);
        let l = link_product(&link_product(&j1, &j2)?, &j3)?;
        let r = link_product(&j1, &link_product(&j2, &j3)?)?;
        c.expect(l.max_abs_diff(&l.align(&r)?)? < 1e-10, format!("associativity triple {i}"));
        let ab = link_product(&j1, &j2)?;
        let ba = link_product(&j2, &j1)?;
        c.expect(ab.max_abs_diff(&ab.align(&ba)?)? < 1e-10, format!("commutativity triple {i}"));
    }
    for i in 0..20 {
        let psi = random_pure(sys(&[("A", 2 + rng.index(2)), ("B", 2 + rng.index(2))]), &mut rng);
        let pt = psi.partial_transpose(&["B"])?;
        c.expect(pt.partial_transpose(&["B"])?.max_abs_diff(&psi)? < 1e-15, format!("involution {i}"));
        let ev = pt.hermitian_eigenvalues()?;
        c.expect(ev.iter().all(|e| (-0.5 - 1e-12..=1.0 + 1e-12).contains(e)), format!("pure-state spectrum {i}"));
    }
    let out = random_pure(sys(&[("A1", 2), ("B1", 1)]), &mut rng);
    let dims = ChannelDims::bipartite(2, 2, 2, 1);
    let constructors: Vec<(&str, ChoiOperator)> = vec![
        ("depolarizing_pp", depolarizing_pp(3, 0.4)?),
        ("depolarizing_bipartite", depolarizing_bipartite(2, 2, 0.4)?),
        ("depolarized_swap", depolarized_swap(2, 0.4)?),
        ("werner_holevo_0", werner_holevo(3, 0)?),
        ("werner_holevo_1", werner_holevo(3, 1)?),
        ("amplitude_damping", amplitude_damping(0.4)?),
        ("identity", identity_channel(3)?),
        ("classical", classical(dims, &random_stochastic(2, 4, &mut rng))?),
        ("replacer", replacer(dims, out.entries())?),
        ("random", random_channel(ChannelDims::bipartite(2, 2, 1, 2), 3, &mut rng)?),
    ];
    for (name, j) in &constructors {
        c.expect(j.cptp_defect()? < 1e-10 && j.matrix().min_eigenvalue()? > -1e-10, format!("{name} not CPTP"));
    }
    let pp = ChannelDims::point_to_point(2, 2);
    for i in 0..10 {
        let (n, m) = (random_channel(pp, 2, &mut rng)?, random_channel(pp, 2, &mut rng)?);
        let lambda = rng.range(0.2, 0.8);
        let g = psucc_global_pair(&n, &m, lambda, &opts())?;
        let mut prev = lambda.max(1.0 - lambda) - 1e-6;
        for k in 1..=3 {
            let s = psucc_ppt_k(&n, &m, lambda, k, &opts())?;
            c.expect(s.value >= prev - 2e-6, format!("pair {i}: not monotone at k={k}"));
            c.expect(s.value <= g + 1e-6, format!("pair {i}: exceeds global at k={k}"));
            c.expect(tester_violation(&s, &n, k)? < 1e-6, format!("pair {i}: tester constraints at k={k}"));
            prev = s.value;
        }
    }
    for i in 0..5 {
        let (n, m) = (random_classical_channel(pp, &mut rng)?, random_classical_channel(pp, &mut rng)?);
        let r = ent_cost_ppt(&n, &m, 0.5, &CostOptions::default())?;
        c.expect(r.cost_bits == Some(0.0), format!("classical pair {i}: cost {:?}", r.cost_bits));
    }
    let (n, m) = (random_channel(pp, 2, &mut rng)?, random_channel(pp, 2, &mut rng)?);
    let k = saturation_bound(&n);
    c.expect(k == 15, format!("saturation bound {k}"));
    let g = psucc_global(&ChannelEnsemble::binary(n.clone(), m.clone(), 0.5)?, &opts())?;
    let v = psucc_ppt_k(&n, &m, 0.5, k, &opts())?.value;
    c.close(v, g.value, 1e-6, "value at the saturation level");
    let bob = n.labels_of(Party::Bob);
    let q = LabeledMatrix::identity(n.system().clone()).scale(1.0 / (2.0 * n.d_in() as f64)).partial_transpose(&bob)?;
    for t in &g.testers {
        let tt = t.partial_transpose(&bob)?;
        let lo = tt.sub(&q.scale(1.0 - k as f64))?.min_eigenvalue()?;
        let hi = q.scale(1.0 + k as f64).sub(&tt)?.min_eigenvalue()?;
        c.expect(lo > -1e-9 && hi > -1e-9, "saturation assignment infeasible");
    }
    Ok(())
}

/// max x − min y over the two-variable regions of the bipartite depolarizing
/// LP, by enumerating vertices of each polygon.
fn corollary_oracle(d: f64, k: f64, delta: f64) -> f64 {
    let c = 1.0 / d;
    // a·(x, u) ≤ b
    let cons = [
        ([-1.0, 0.0], 0.0),
        ([1.0, 0.0], c),
        ([0.0, -1.0], 0.0),
        ([0.0, 1.0], c),
        ([-1.0, 1.0 - k], 0.0),
        ([1.0, -(1.0 + k)], 0.0),
        ([1.0, 1.0 - k], c * k),
        ([-1.0, -(1.0 + k)], -c * (1.0 + k) + c),
    ];
    let mut xs = Vec::new();
    for i in 0..cons.len() {
        for j in i + 1..cons.len() {
            let (a, b) = (cons[i], cons[j]);
            let det = a.0[0] * b.0[1] - a.0[1] * b.0[0];
            if det.abs() < 1e-14 {
                continue;
            }
            let x = (a.1 * b.0[1] - a.0[1] * b.1) / det;
            let u = (a.0[0] * b.1 - a.1 * b.0[0]) / det;
            if cons.iter().all(|(r, s)| r[0] * x + r[1] * u <= s + 1e-12) {
                xs.push(x);
            }
        }
    }
    let hi = xs.iter().cloned().fold(f64::MIN, f64::max);
    let lo = xs.iter().cloned().fold(f64::MAX, f64::min);
    0.5 + 0.5 * delta * (d - 1.0 / d) * (hi - lo)
}

fn criterion_7(c: &mut Check) -> chandisc::Result<()> {
    for (n, m, lambda, k) in [
        (depolarizing_pp(2, 0.9)?, depolarizing_pp(2, 0.1)?, 0.5, 1),
        (amplitude_damping(0.2)?, amplitude_damping(0.6)?, 0.35, 2),
    ] {
        let v = composite_psucc(&ParamChannelSet::singleton(&n), &ParamChannelSet::singleton(&m), &n, lambda, k, &opts())?;
        let d = psucc_ppt_k_dual(&n, &m, lambda, k, &opts())?;
        c.close(v, d, 1e-6, &format!("singleton sets lambda={lambda} k={k}"));
    }
    for ((p0, p1), (q0, q1)) in [((0.8, 0.9), (0.1, 0.3)), ((0.55, 0.7), (0.2, 0.45))] {
        let set = |a: f64, b: f64| ParamChannelSet::segment(&depolarizing_bipartite(2, 2, a)?, &depolarizing_bipartite(2, 2, b)?);
        let (s0, s1) = (set(p0, p1)?, set(q0, q1)?);
        let template = depolarizing_bipartite(2, 2, p0)?;
        for k in [1, 2] {
            let v = composite_psucc(&s0, &s1, &template, 0.5, k, &opts())?;
            let want = corollary_oracle(4.0, k as f64, p0 - q1);
            c.close(v, want, 1e-6, &format!("P=[{p0},{p1}] Q=[{q0},{q1}] k={k}"));
        }
    }
    Ok(())
}

fn main() {
    let mut suite = Vec::new();
    let mut results: Vec<(u8, &str, Check, f64)> = Vec::new();
    let mut timed = |id: u8, name: &'static str, f: &mut dyn FnMut(&mut Check) -> chandisc::Result<()>| {
        let t = Instant::now();
        let c = Check::run(|c| f(c));
        results.push((id, name, c, t.elapsed().as_secs_f64()));
    };
    timed(1, "entanglement costs of the closed-form families", &mut |c| criterion_1(c, &mut suite));
    timed(2, "closed-form success probabilities", &mut |c| criterion_2(c, &mut suite));
    timed(3, "reduced LPs match full SDPs", &mut |c| criterion_3(c, &mut suite));
    let suite_snapshot = suite.clone();
    timed(4, "strong duality on suite instances", &mut |c| criterion_4(c, &suite_snapshot));
    timed(5, "amplitude damping copies structure", &mut criterion_5);
    timed(6, "property suites", &mut criterion_6);
    timed(7, "composite discrimination", &mut criterion_7);

    let mut unexpected = 0;
    for (id, name, c, secs) in &results {
        let status = if c.failures.is_empty() && c.open.is_empty() { "PASS" } else { "FAIL" };
        println!("{status} criterion {id}: {name} ({secs:.1}s)");
        for f in &c.failures {
            println!("    failed: {f}");
        }
        for f in &c.open {
            println!("    open item: {f}");
        }
        for n in &c.notes {
            println!("    note: {n}");
        }
        unexpected += c.failures.len();
    }
    if unexpected > 0 {
        eprintln!("{unexpected} unexpected failures");
        std::process::exit(1);
    }
}
