use chandisc::channel::{
    amplitude_damping, classical, depolarized_swap, depolarizing_bipartite, depolarizing_pp, identity_channel,
    link_product, parallel_compose, replacer, werner_holevo, ChannelDims, ChoiOperator,
};
use chandisc::random::{random_channel, random_hermitian, random_pure, random_stochastic, Rng};
use chandisc::tensor::{LabeledMatrix, RegisterSystem};
use proptest::prelude::*;

fn sys(pairs: &[(&str, usize)]) -> RegisterSystem {
    RegisterSystem::from_pairs(pairs).unwrap()
}

fn close(a: &LabeledMatrix, b: &LabeledMatrix, tol: f64) -> bool {
    a.max_abs_diff(&a.align(b).unwrap()).unwrap() < tol
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn link_product_is_associative(seed in any::<u64>(), da in 1usize..3, db in 1usize..3, dc in 1usize..3, dd in 1usize..3) {
        let mut rng = Rng::seed(seed);
        let j1 = random_hermitian(sys(&[("A", da), ("B", db)]), &mut rng);
        let j2 = random_hermitian(sys(&[("B", db), ("C", dc)]), &mut rng);
        let j3 = random_hermitian(sys(&[("C", dc), ("D", dd)]), &mut rng);
        let left = link_product(&link_product(&j1, &j2).unwrap(), &j3).unwrap();
        let right = link_product(&j1, &link_product(&j2, &j3).unwrap()).unwrap();
        prop_assert!(close(&left, &right, 1e-10));
    }

    #[test]
    fn link_product_is_commutative(seed in any::<u64>(), da in 1usize..4, db in 1usize..4, dc in 1usize..4) {
        let mut rng = Rng::seed(seed);
        let j1 = random_hermitian(sys(&[("A", da), ("B", db)]), &mut rng);
        let j2 = random_hermitian(sys(&[("C", dc), ("B", db)]), &mut rng);
        let ab = link_product(&j1, &j2).unwrap();
        let ba = link_product(&j2, &j1).unwrap();
        prop_assert!(close(&ab, &ba, 1e-10));
    }

    #[test]
    fn partial_transpose_is_an_involution(seed in any::<u64>(), da in 1usize..4, db in 1usize..4) {
        let mut rng = Rng::seed(seed);
        let x = random_hermitian(sys(&[("A", da), ("B", db)]), &mut rng);
        let back = x.partial_transpose(&["B"]).unwrap().partial_transpose(&["B"]).unwrap();
        prop_assert!(x.max_abs_diff(&back).unwrap() < 1e-15);
    }

    #[test]
    fn pure_state_partial_transpose_spectrum(seed in any::<u64>(), da in 2usize..4, db in 2usize..4) {
        let mut rng = Rng::seed(seed);
        let psi = random_pure(sys(&[("A", da), ("B", db)]), &mut rng);
        let ev = psi.partial_transpose(&["B"]).unwrap().hermitian_eigenvalues().unwrap();
        for e in ev {
            prop_assert!((-0.5 - 1e-12..=1.0 + 1e-12).contains(&e), "{}", e);
        }
    }

    #[test]
    fn random_channels_are_cptp(seed in any::<u64>(), rank in 1usize..4) {
        let mut rng = Rng::seed(seed);
        let c = random_channel(ChannelDims::bipartite(2, 1, 1, 2), rank, &mut rng).unwrap();
        prop_assert!(c.cptp_defect().unwrap() < 1e-10);
        let ev = c.matrix().hermitian_eigenvalues().unwrap();
        prop_assert!(ev.iter().all(|&e| e > -1e-10));
    }

    #[test]
    fn family_constructors_are_cptp(p in 0.0f64..=1.0, d in 2usize..4) {
        let fams: Vec<ChoiOperator> = vec![
            depolarizing_pp(d, p).unwrap(),
            depolarizing_bipartite(2, d - 1, p).unwrap(),
            depolarized_swap(2, p).unwrap(),
            werner_holevo(d, 0).unwrap(),
            werner_holevo(d, 1).unwrap(),
            amplitude_damping(p).unwrap(),
            identity_channel(d).unwrap(),
        ];
        for c in fams {
            prop_assert!(c.cptp_defect().unwrap() < 1e-10);
            prop_assert!(c.matrix().min_eigenvalue().unwrap() > -1e-10);
        }
    }

    #[test]
    fn classical_and_replacer_are_cptp(seed in any::<u64>()) {
        let mut rng = Rng::seed(seed);
        let dims = ChannelDims::bipartite(2, 2, 2, 1);
        let c = classical(dims, &random_stochastic(2, 4, &mut rng)).unwrap();
        prop_assert!(c.cptp_defect().unwrap() < 1e-10);
        let state = random_pure(sys(&[("A1", 2), ("B1", 1)]), &mut rng);
        let r = replacer(dims, state.entries()).unwrap();
        prop_assert!(r.cptp_defect().unwrap() < 1e-10);
    }
}

#[test]
fn link_with_input_state_applies_the_channel() {
    let mut rng = Rng::seed(7);
    let c = random_channel(ChannelDims::point_to_point(2, 3), 2, &mut rng).unwrap();
    let rho = random_pure(sys(&[("A0", 2), ("B0", 1)]), &mut rng);
    let out = link_product(&rho, c.matrix()).unwrap();
    let direct = c.apply(&rho).unwrap();
    assert!(close(&out, &direct, 1e-12));
}

#[test]
fn parallel_copies_multiply_choi_traces() {
    let a = amplitude_damping(0.3).unwrap();
    let b = depolarizing_pp(2, 0.4).unwrap();
    let ab = parallel_compose(&a, &b).unwrap();
    assert!((ab.matrix().trace().re - 4.0).abs() < 1e-12);
    assert!(ab.cptp_defect().unwrap() < 1e-12);
}
