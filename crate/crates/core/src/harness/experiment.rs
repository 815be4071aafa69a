//! The end-to-end likelihood-ratio experiment on a configured state pair.

use super::config::ExperimentConfig;
use super::report::{Checks, RateGap, RunReport, Timings};
use crate::opcore::{relative_entropy, DensityMatrix};
use crate::testing::{
    beta_star, chernoff_sup, cumulant_bound_audit, spectrum_convergence_audit, stein_rate_curve, ConvergenceOptions,
    SteinRunRecord, CUMULANT_SLACK, DD_TOLERANCE, VARIANCE_SLACK,
};
use crate::{Limits, Result};

/// Largest `k^n` for which the dense Neyman–Pearson optimum is compared
/// against the measured test.
const BETA_STAR_MAX_DIM: usize = 64;

/// Runs the measured likelihood-ratio test, the convergence audit and the
/// cumulant audit for every `n` in the configured range.
pub fn run_stein_experiment(config: &ExperimentConfig) -> Result<RunReport> {
    config.validate()?;
    let limits = config.limits();
    let (rho, sigma) = config.states()?;
    limits.check_power(sigma.dim(), config.n_max)?;
    sigma.require_full_rank()?;

    let mut report = RunReport::new("stein-run", config);
    let mut timings = Timings::default();
    let mut checks = Checks::default();
    let n_range = config.n_range();

    let d = relative_entropy(&rho, &sigma)?;
    report.relative_entropy = Some(d);
    let runs = timings.time("stein_rate_curve", || {
        stein_rate_curve(&rho, &sigma, config.epsilon_margin, &n_range, &limits)
    })?;
    record_runs(&mut checks, &runs, "");
    report.rate_gaps = runs
        .iter()
        .map(|r| RateGap {
            n: r.n,
            rate: r.rate,
            target: r.threshold,
            gap: r.rate - r.threshold,
        })
        .collect();
    timings.time("beta_star_dominance", || {
        dominance_checks(&mut checks, &rho, &sigma, &runs, &limits, "")
    })?;
    report.stein_runs = runs;

    let options = ConvergenceOptions {
        delta: config.delta,
        ..ConvergenceOptions::default()
    };
    let rows = timings.time("spectrum_convergence_audit", || {
        spectrum_convergence_audit(&rho, &sigma, &n_range, options, &limits)
    })?;
    for r in &rows {
        record_convergence(&mut checks, r, "");
    }
    report.convergence = rows;

    let cross = -rho.op().trace_product(&sigma.op().map_spectrum(f64::ln))?;
    let k = sigma.dim() as f64;
    let audits = timings.time("cumulant_bound_audit", || {
        n_range
            .iter()
            .map(|&n| {
                // just past the point where the finite-n bound turns positive
                let a = cross + (k - 1.0) * ((n + 1) as f64).ln() / n as f64 + config.epsilon_margin;
                cumulant_bound_audit(&rho, &sigma, a, n, &limits)
            })
            .collect::<Result<Vec<_>>>()
    })?;
    for c in &audits {
        let inst = format!("n={} a={:.6}", c.n, c.a);
        checks.ge("testing.cumulant_bound", &inst, c.lhs, c.rhs, CUMULANT_SLACK);
        checks.le("testing.markov", &inst, c.tail_probability, c.markov_bound, 1e-12 * c.markov_bound);
        checks.ge("testing.chernoff_nonnegative", &inst, c.rhs, 0.0, 0.0);
    }
    let chernoff = chernoff_sup(&rho, &sigma, cross)?;
    checks.ge("testing.chernoff_nonnegative", "a=-Tr rho log sigma", chernoff.value, 0.0, 0.0);
    report.cumulant = audits;

    report.set_checks(checks);
    report.timings = timings.into_entries();
    Ok(report)
}

pub(crate) fn record_runs(checks: &mut Checks, runs: &[SteinRunRecord], tag: &str) {
    for r in runs {
        let inst = format!("{tag}n={}", r.n);
        checks.le("testing.stein_beta_bound", &inst, r.beta_n, r.beta_bound, 0.0);
        checks.ge("testing.stein_rate", &inst, r.rate, r.threshold, 0.0);
    }
}

pub(crate) fn record_convergence(checks: &mut Checks, r: &crate::testing::ConvergenceRow, tag: &str) {
    let inst = format!("{tag}n={}", r.n);
    if let Some(gap) = r.dd_gap {
        checks.le("testing.dd_identity", &inst, gap, 0.0, DD_TOLERANCE);
    }
    if r.n >= 2 {
        checks.le("testing.variance_bound", &inst, r.variance, r.variance_bound, VARIANCE_SLACK);
    }
}

/// `β*_n(α_n) <= β_n` wherever the measured test has `0 < α_n < 1`.
pub(crate) fn dominance_checks(
    checks: &mut Checks,
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    runs: &[SteinRunRecord],
    limits: &Limits,
    tag: &str,
) -> Result<()> {
    for r in runs {
        let small = sigma.dim().checked_pow(r.n as u32).is_some_and(|d| d <= BETA_STAR_MAX_DIM);
        if !small || !(r.alpha_n > 1e-9 && r.alpha_n < 1.0 - 1e-9) {
            continue;
        }
        let opt = beta_star(rho, sigma, r.n, r.alpha_n, limits)?;
        checks.le("testing.beta_star_dominance", format!("{tag}n={}", r.n), opt.beta, r.beta_n, 1e-10);
    }
    Ok(())
}
