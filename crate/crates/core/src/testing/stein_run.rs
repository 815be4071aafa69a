//! Likelihood-ratio tests on the outcomes of `E^n × E(sigma^{⊗n})`.

use serde::{Deserialize, Serialize};

use crate::opcore::{relative_entropy, DensityMatrix, ProductOperator};
use crate::symmetry::{stein_measurement, SteinMeasurement};
use crate::{Error, Limits, Result};

/// One run of the measured likelihood-ratio test at a fixed `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteinRunRecord {
    pub n: usize,
    pub alpha_n: f64,
    pub beta_n: f64,
    /// `−(1/n) log β_n`; `+∞` when nothing with σ-mass is accepted.
    pub rate: f64,
    pub threshold: f64,
    pub cells: usize,
    pub accepted_cells: usize,
    /// `exp(−n·threshold)`.
    pub beta_bound: f64,
    pub beta_bound_ok: bool,
}

/// Per-cell measured probabilities, with `log P_σ` taken from the exact
/// cell eigenvalues rather than from a trace.
#[derive(Debug, Clone)]
pub struct MeasuredCells {
    pub p_rho: Vec<f64>,
    pub log_p_sigma: Vec<f64>,
}

/// `P_ρ(i) = Tr rho^{⊗n} E_i` for every cell of `m`.
pub fn measured_cells(rho: &DensityMatrix, m: &SteinMeasurement) -> Result<MeasuredCells> {
    let product = ProductOperator::of_state(rho, m.n);
    if product.dim() != m.pvm.dim() {
        return Err(Error::DimensionMismatch {
            left: product.dim(),
            right: m.pvm.dim(),
        });
    }
    let p_rho = m
        .pvm
        .cells()
        .iter()
        .map(|c| product.expectation_on(c.basis()).max(0.0))
        .collect();
    Ok(MeasuredCells {
        p_rho,
        log_p_sigma: m.log_sigma_probabilities(),
    })
}

/// Accepts every cell with `(1/n) log(P_ρ(i)/P_σ(i)) >= threshold`.
pub fn likelihood_ratio_run(cells: &MeasuredCells, n: usize, threshold: f64) -> SteinRunRecord {
    let nt = n as f64 * threshold;
    let mut accepted_rho = 0.0;
    let mut beta = 0.0;
    let mut accepted = 0;
    for (&p, &log_q) in cells.p_rho.iter().zip(&cells.log_p_sigma) {
        let take = if p <= 0.0 {
            false
        } else if log_q == f64::NEG_INFINITY {
            true
        } else {
            p.ln() - log_q >= nt
        };
        if take {
            accepted += 1;
            accepted_rho += p;
            beta += log_q.exp();
        }
    }
    let total_rho: f64 = cells.p_rho.iter().sum();
    let alpha = (1.0 - accepted_rho / total_rho).clamp(0.0, 1.0);
    let beta = beta.clamp(0.0, 1.0);
    let bound = (-nt).exp();
    SteinRunRecord {
        n,
        alpha_n: alpha,
        beta_n: beta,
        rate: -beta.ln() / n as f64,
        threshold,
        cells: cells.p_rho.len(),
        accepted_cells: accepted,
        beta_bound: bound,
        beta_bound_ok: beta <= bound,
    }
}

/// Runs the measured likelihood-ratio test with threshold
/// `D(rho‖sigma) − margin` for every `n` in `n_range`.
pub fn stein_rate_curve(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    margin: f64,
    n_range: &[usize],
    limits: &Limits,
) -> Result<Vec<SteinRunRecord>> {
    if !(margin > 0.0) {
        return Err(Error::InvalidArgument(format!("margin {margin} must be > 0")));
    }
    sigma.require_full_rank()?;
    for &n in n_range {
        limits.check_power(sigma.dim(), n)?;
    }
    let threshold = relative_entropy(rho, sigma)? - margin;
    n_range
        .iter()
        .map(|&n| {
            let m = stein_measurement(sigma, n, limits)?;
            let cells = measured_cells(rho, &m)?;
            Ok(likelihood_ratio_run(&cells, n, threshold))
        })
        .collect()
}
