//! Classical information-spectrum toolkit: finite distributions, i.i.d.
//! log-likelihood spectra, threshold tests, and the `Σ p (log p)^2`
//! extremal problem.

mod distribution;
mod extremal;
mod information;

pub use distribution::{classical_errors, kl_divergence, ClassicalTest, FiniteDistribution, NORMALIZATION_TOL};
pub use extremal::{kkt_candidates, max_plog2, max_plog2_oracle, sum_plog2, KktCandidate};
pub use information::{
    finite_n_spectrum_bounds, iid_log_ratio_spectrum, iid_log_ratio_spectrum_with,
    np_dominance_check, s_test, s_test_classical, s_test_on, spectrum_bounds_on, DominanceCheck,
    STestOutcome, SpectrumCdf, SpectrumOptions, SpectrumPoint,
};
