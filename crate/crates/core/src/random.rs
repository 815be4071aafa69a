//! Seeded random instances: states, unitaries, measurements and tests.
//!
//! Every consumer draws from a [`Substream`] identified by a root seed and a
//! fixed label, so adding a new consumer never perturbs existing ones.

use nalgebra::QR;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::opcore::{CellLabel, DensityMatrix, HermitianOperator, Povm, Pvm, TestOperator};
use crate::{CMatrix, Complex64};

/// A labelled ChaCha stream derived from a root seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Substream {
    seed: u64,
    stream: u64,
}

impl Substream {
    pub fn new(seed: u64, label: &str) -> Self {
        Self {
            seed,
            stream: fnv1a(label.as_bytes()),
        }
    }

    pub fn rng(&self) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

// A fixed, documented hash so stream ids are stable across toolchains
// (std's hasher makes no such promise).
fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// Hilbert–Schmidt random density matrix (full rank with probability one).
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DensityMatrix {
    let g = gaussian_matrix(rng, dim, dim);
    let m = &g * g.adjoint();
    let tr: f64 = (0..dim).map(|i| m[(i, i)].re).sum();
    DensityMatrix::from_matrix(m / Complex64::new(tr, 0.0)).expect("Gram matrix is a state")
}

/// Random pure state `|v><v|` with Gaussian `v`.
pub fn random_pure<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DensityMatrix {
    let v: Vec<Complex64> = gaussian_matrix(rng, dim, 1).iter().copied().collect();
    DensityMatrix::pure(&v).expect("Gaussian vector is nonzero")
}

/// Random diagonal state with Dirichlet(1) spectrum.
pub fn random_diagonal_density<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DensityMatrix {
    DensityMatrix::diagonal(&random_probs(rng, dim)).expect("probability vector")
}

/// Uniform point of the probability simplex.
pub fn random_probs<R: Rng + ?Sized>(rng: &mut R, k: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

/// Haar-random unitary (QR of a Ginibre matrix with the phase correction).
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMatrix {
    let qr = QR::new(gaussian_matrix(rng, dim, dim));
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// GUE-like random Hermitian operator.
pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> HermitianOperator {
    let g = gaussian_matrix(rng, dim, dim);
    HermitianOperator::new((&g + g.adjoint()) * Complex64::new(0.5, 0.0)).expect("Hermitian by construction")
}

/// Random invertible (Ginibre) matrix.
pub fn random_invertible<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMatrix {
    gaussian_matrix(rng, dim, dim)
}

/// PVM whose cells are consecutive column blocks of a Haar unitary.
pub fn random_pvm<R: Rng + ?Sized>(rng: &mut R, dim: usize, sizes: &[usize]) -> Pvm {
    Pvm::from_unitary(&random_unitary(rng, dim), sizes).expect("sizes sum to dim")
}

/// Random POVM with `outcomes` elements `S^{-1/2} G_i G_i† S^{-1/2}`.
pub fn random_povm<R: Rng + ?Sized>(rng: &mut R, dim: usize, outcomes: usize) -> Povm {
    let raw: Vec<CMatrix> = (0..outcomes)
        .map(|_| {
            let g = gaussian_matrix(rng, dim, dim);
            &g * g.adjoint()
        })
        .collect();
    let total = raw.iter().fold(CMatrix::zeros(dim, dim), |acc, m| acc + m);
    let inv_sqrt = HermitianOperator::new(total)
        .expect("sum of Gram matrices")
        .map_spectrum(|x| 1.0 / x.sqrt());
    let s = inv_sqrt.matrix();
    let elements = raw
        .into_iter()
        .enumerate()
        .map(|(i, m)| {
            let e = HermitianOperator::new(s * m * s).expect("congruence keeps Hermiticity");
            (CellLabel::index(i), e)
        })
        .collect();
    Povm::new(elements).expect("normalised by construction")
}

/// Random test `U diag(u) U†` with `u` uniform in `[0, 1]`.
pub fn random_test<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> TestOperator {
    let u = random_unitary(rng, dim);
    let mut scaled = u.clone();
    for j in 0..dim {
        let x: f64 = rng.random();
        scaled.column_mut(j).scale_mut(x);
    }
    let op = HermitianOperator::new(scaled * u.adjoint()).expect("Hermitian by construction");
    TestOperator::new(op).expect("spectrum in [0, 1]")
}
