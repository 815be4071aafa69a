//! # stein-lab
//!
//! A desk-scale laboratory for simple quantum hypothesis testing between
//! i.i.d. states `rho^{⊗n}` and `sigma^{⊗n}`.
//!
//! The crate is organised in five modules:
//!
//! - [`opcore`]: Hermitian operators, density matrices, PVM/POVM algebra,
//!   pinching, relative entropies and the pinching operator inequalities.
//! - [`symmetry`]: partitions, symmetric-group characters, the isotypic
//!   (Schur–Weyl) decomposition of `(C^k)^{⊗n}`, the qubit total-spin
//!   decomposition, and the joint measurement `E^n × E(sigma^{⊗n})`.
//! - [`testing`]: error probabilities, exact quantum Neyman–Pearson tests,
//!   the measured likelihood-ratio test built on the joint measurement, and
//!   the variance / cumulant audits.
//! - [`spectrum`]: classical finite distributions, the i.i.d. log-likelihood
//!   spectrum, threshold tests and the `max Σ p (log p)^2` extremal problem.
//! - [`harness`]: configuration, experiment orchestration, reports and the
//!   audit registry behind the `stein-lab` binary.
//!
//! All logarithms are natural logarithms.

pub mod harness;
pub mod opcore;
pub mod random;
pub mod spectrum;
pub mod symmetry;
pub mod testing;

mod error;
mod limits;
pub(crate) mod numeric;

pub use error::{Error, Result};
pub use limits::{Limits, Tolerances};

pub use num_complex::Complex64;

/// Dense complex matrix used for every operator in the crate.
pub type CMatrix = nalgebra::DMatrix<Complex64>;
