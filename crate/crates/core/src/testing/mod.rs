//! Quantum hypothesis tests: error probabilities, exact Neyman–Pearson
//! optima with duality certificates, likelihood-ratio tests on the joint
//! measurement, and the information-spectrum audits.

mod audits;
mod neyman_pearson;
mod stein_run;

pub use audits::{
    chernoff_sup, cumulant_bound_audit, cumulant_on, log_trace_power, log_variance, rank_one_refinement,
    spectrum_convergence_audit, variance_bound, ChernoffSup, ConvergenceOptions, ConvergenceRow, CumulantAudit,
    RankOneRefinement, CUMULANT_SLACK, DD_TOLERANCE, T_TOLERANCE, VARIANCE_SLACK,
};
pub use neyman_pearson::{
    beta_star, beta_star_for, classical_beta_star, dual_bound, error_probabilities, np_curve, np_test,
    positive_part_trace, BetaStar, ErrorPair, NpCurvePoint, ZERO_CELL_TOL,
};
pub use stein_run::{likelihood_ratio_run, measured_cells, stein_rate_curve, MeasuredCells, SteinRunRecord};
