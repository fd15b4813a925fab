//! Seeded random instances: Haar unitaries, states and channels.

use nalgebra::DMatrix;
use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::channel::{choi_from_kraus, classical, ChannelDims, ChoiOperator};
use crate::error::Result;
use crate::tensor::{LabeledMatrix, RegisterSystem, C64};

pub struct Rng(ChaCha8Rng);

impl Rng {
    pub fn seed(seed: u64) -> Self {
        Rng(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn uniform(&mut self) -> f64 {
        self.0.random::<f64>()
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn index(&mut self, n: usize) -> usize {
        self.0.random_range(0..n)
    }

    pub fn normal(&mut self) -> f64 {
        self.0.sample(StandardNormal)
    }

    pub fn complex_normal(&mut self) -> C64 {
        C64::new(self.normal(), self.normal()) * std::f64::consts::FRAC_1_SQRT_2
    }
}

pub fn ginibre(rows: usize, cols: usize, rng: &mut Rng) -> DMatrix<C64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.complex_normal())
}

/// Haar-distributed unitary from the QR decomposition of a Ginibre matrix.
pub fn haar_unitary(d: usize, rng: &mut Rng) -> DMatrix<C64> {
    let qr = ginibre(d, d, rng).qr();
    let (q, r) = (qr.q(), qr.r());
    let mut u = q;
    for j in 0..d {
        let x = r[(j, j)];
        let phase = if x.norm() > 0.0 { x / x.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..d {
            u[(i, j)] *= phase;
        }
    }
    u
}

/// Random density matrix of the given rank (induced measure).
pub fn random_density(system: RegisterSystem, rank: usize, rng: &mut Rng) -> LabeledMatrix {
    let n = system.dim();
    let g = ginibre(n, rank.max(1), rng);
    let m = &g * g.adjoint();
    let t = m.trace();
    LabeledMatrix::hermitian(system, m / t).expect("G G^dagger is Hermitian")
}

pub fn random_pure(system: RegisterSystem, rng: &mut Rng) -> LabeledMatrix {
    random_density(system, 1, rng)
}

/// Random Hermitian matrix with Gaussian entries.
pub fn random_hermitian(system: RegisterSystem, rng: &mut Rng) -> LabeledMatrix {
    let n = system.dim();
    let g = ginibre(n, n, rng);
    LabeledMatrix::hermitian(system, (&g + g.adjoint()) * C64::new(0.5, 0.0)).unwrap()
}

/// Random channel with `kraus_rank` Kraus operators, taken from a Haar isometry.
pub fn random_channel(dims: ChannelDims, kraus_rank: usize, rng: &mut Rng) -> Result<ChoiOperator> {
    let (din, dout) = (dims.d_in(), dims.d_out());
    let r = kraus_rank.max(1);
    let g = ginibre(dout * r, din, rng);
    let v = g.qr().q();
    let kraus: Vec<DMatrix<C64>> = (0..r).map(|k| v.rows(k * dout, dout).into_owned()).collect();
    choi_from_kraus(&kraus, dims)
}

/// Random column-stochastic matrix with `rows` outcomes and `cols` inputs.
pub fn random_stochastic(rows: usize, cols: usize, rng: &mut Rng) -> DMatrix<f64> {
    let mut m = DMatrix::from_fn(rows, cols, |_, _| -rng.uniform().max(1e-300).ln());
    for mut c in m.column_iter_mut() {
        let s = c.sum();
        c /= s;
    }
    m
}

pub fn random_classical_channel(dims: ChannelDims, rng: &mut Rng) -> Result<ChoiOperator> {
    let p = random_stochastic(dims.d_out(), dims.d_in(), rng);
    classical(dims, &p)
}
