//! Finite-`n` audits of the information-spectrum chain: convergence of the
//! measured log-likelihoods, the `(log sigma)^{(n)}` identity, the variance
//! bound, and the Markov/cumulant bound.

use serde::{Deserialize, Serialize};

use crate::numeric::{self, golden_max};
use crate::opcore::{local_log_sum, tensor_power, DensityMatrix, ProductOperator};
use crate::symmetry::{stein_measurement, SteinMeasurement};
use crate::{Error, Limits, Result};

/// Interval tolerance of every maximization over `t ∈ [0, 1]`.
pub const T_TOLERANCE: f64 = 1e-8;

/// Rank-one refinement of a joint measurement: each cell is split along the
/// eigenbasis of `rho^{⊗n}` compressed to the cell. Each refined outcome
/// keeps its parent's `sigma^{⊗n}` eigenvalue, so `P_σ(i) = μ_i`.
#[derive(Debug, Clone)]
pub struct RankOneRefinement {
    pub n: usize,
    pub p_rho: Vec<f64>,
    pub log_p_sigma: Vec<f64>,
}

pub fn rank_one_refinement(rho: &DensityMatrix, m: &SteinMeasurement) -> Result<RankOneRefinement> {
    let product = ProductOperator::of_state(rho, m.n);
    if product.dim() != m.pvm.dim() {
        return Err(Error::DimensionMismatch {
            left: product.dim(),
            right: m.pvm.dim(),
        });
    }
    let mut p_rho = Vec::with_capacity(m.pvm.dim());
    let mut log_p_sigma = Vec::with_capacity(m.pvm.dim());
    for (cell, info) in m.pvm.cells().iter().zip(&m.cells) {
        let (values, _) = numeric::eigh(&product.compress(cell.basis()));
        for v in values {
            p_rho.push(v.max(0.0));
            log_p_sigma.push(info.log_sigma_eigenvalue);
        }
    }
    Ok(RankOneRefinement {
        n: m.n,
        p_rho,
        log_p_sigma,
    })
}

fn mean_log(rho: &DensityMatrix, f: &DensityMatrix) -> Result<f64> {
    let log_f = f.op().map_spectrum(|x| if x > 0.0 { x.ln() } else { 0.0 });
    rho.op().trace_product(&log_f)
}

/// Single-site variance `Tr rho (log rho)² − (Tr rho log rho)²`.
pub fn log_variance(rho: &DensityMatrix) -> f64 {
    let spec = rho.op().eigh();
    let (mut m1, mut m2) = (0.0, 0.0);
    for &p in &spec.values {
        if p > 0.0 {
            m1 += p * p.ln();
            m2 += p * p.ln() * p.ln();
        }
    }
    (m2 - m1 * m1).max(0.0)
}

/// Right-hand side of the variance bound:
/// `8((k−1) log(n+1)/n)² + 2 Var/n`.
pub fn variance_bound(k: usize, n: usize, single_site_variance: f64) -> f64 {
    let nf = n as f64;
    let pinch = (k as f64 - 1.0) * (nf + 1.0).ln() / nf;
    8.0 * pinch * pinch + 2.0 * single_site_variance / nf
}

/// One row of [`spectrum_convergence_audit`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub rank_one_cells: usize,
    /// (a): `P_ρ{|(1/n) log P_ρ(i) − Tr rho log rho| > δ}`.
    pub deviation_probability: f64,
    /// (b): `Σ_i P_ρ(i)|(1/n) log P_σ(i) − Tr rho log sigma|`.
    pub dd_measured: f64,
    /// (b): `Tr rho^{⊗n}|(1/n)(log sigma)^{(n)} − Tr rho log sigma|`, when the
    /// dense side fits `dense_max_dim`.
    pub dd_dense: Option<f64>,
    pub dd_gap: Option<f64>,
    pub dd_ok: bool,
    /// (c): `Σ_i P_ρ(i)((1/n) log P_ρ(i) − Tr rho log rho)²`.
    pub variance: f64,
    pub variance_bound: f64,
    pub variance_ok: bool,
}

/// Tolerance for the `(log sigma)^{(n)}` identity.
pub const DD_TOLERANCE: f64 = 1e-8;
/// Additive slack on the variance bound.
pub const VARIANCE_SLACK: f64 = 1e-8;

#[derive(Debug, Clone, Copy)]
pub struct ConvergenceOptions {
    pub delta: f64,
    /// Largest `k^n` for which the dense side of (b) is materialised.
    pub dense_max_dim: usize,
}

impl Default for ConvergenceOptions {
    fn default() -> Self {
        Self {
            delta: 0.1,
            dense_max_dim: 256,
        }
    }
}

pub fn spectrum_convergence_audit(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    n_range: &[usize],
    options: ConvergenceOptions,
    limits: &Limits,
) -> Result<Vec<ConvergenceRow>> {
    sigma.require_full_rank()?;
    rho.op().check_dim(sigma.dim())?;
    let k = sigma.dim();
    let h_rho = mean_log(rho, rho)?;
    let h_cross = mean_log(rho, sigma)?;
    let var1 = log_variance(rho);
    n_range
        .iter()
        .map(|&n| {
            let m = stein_measurement(sigma, n, limits)?;
            let refined = rank_one_refinement(rho, &m)?;
            let nf = n as f64;
            let (mut dev, mut dd, mut var) = (0.0, 0.0, 0.0);
            for (&p, &lq) in refined.p_rho.iter().zip(&refined.log_p_sigma) {
                if p <= 0.0 {
                    continue;
                }
                let x = p.ln() / nf - h_rho;
                if x.abs() > options.delta {
                    dev += p;
                }
                var += p * x * x;
                dd += p * (lq / nf - h_cross).abs();
            }
            let dense = if m.pvm.dim() <= options.dense_max_dim {
                Some(dense_dd(rho, sigma, n, h_cross, limits)?)
            } else {
                None
            };
            let gap = dense.map(|d| (d - dd).abs());
            let bound = variance_bound(k, n, var1);
            Ok(ConvergenceRow {
                n,
                rank_one_cells: refined.p_rho.len(),
                deviation_probability: dev,
                dd_measured: dd,
                dd_dense: dense,
                dd_gap: gap,
                dd_ok: gap.is_none_or(|g| g <= DD_TOLERANCE),
                variance: var,
                variance_bound: bound,
                variance_ok: var <= bound + VARIANCE_SLACK,
            })
        })
        .collect()
}

/// `Tr rho^{⊗n}|(1/n)(log sigma)^{(n)} − c I|` from dense operators.
fn dense_dd(rho: &DensityMatrix, sigma: &DensityMatrix, n: usize, c: f64, limits: &Limits) -> Result<f64> {
    let nf = n as f64;
    let shifted = local_log_sum(sigma, n, limits)?.map_spectrum(|x| (x / nf - c).abs());
    let rho_n = tensor_power(rho, n, limits)?;
    rho_n.op().trace_product(&shifted)
}

/// `sup_{0 <= t <= 1} (a t − log Tr rho sigma^{−t})` and its maximiser.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChernoffSup {
    pub value: f64,
    pub argmax_t: f64,
}

/// Weights `⟨v_j|rho|v_j⟩` and `log μ_j` in the eigenbasis of `sigma`.
fn sigma_frame(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<(Vec<f64>, Vec<f64>)> {
    sigma.require_full_rank()?;
    rho.op().check_dim(sigma.dim())?;
    let spec = sigma.op().eigh();
    let rotated = spec.vectors.adjoint() * rho.matrix() * &spec.vectors;
    let weights = (0..sigma.dim()).map(|j| rotated[(j, j)].re.max(0.0)).collect();
    let logs = spec.values.iter().map(|m| m.ln()).collect();
    Ok((weights, logs))
}

/// `log Tr rho sigma^{−t}`.
pub fn log_trace_power(rho: &DensityMatrix, sigma: &DensityMatrix, t: f64) -> Result<f64> {
    let (w, l) = sigma_frame(rho, sigma)?;
    Ok(log_mgf(&w, &l, t))
}

fn log_mgf(weights: &[f64], log_q: &[f64], t: f64) -> f64 {
    numeric::log_sum_exp(
        weights
            .iter()
            .zip(log_q)
            .filter(|(&w, _)| w > 0.0)
            .map(|(&w, &l)| w.ln() - t * l),
    )
}

pub fn chernoff_sup(rho: &DensityMatrix, sigma: &DensityMatrix, a: f64) -> Result<ChernoffSup> {
    let (w, l) = sigma_frame(rho, sigma)?;
    // log Σ w = log Tr rho ≈ 0 at t = 0; pin it so the value is >= 0 exactly
    let base = log_mgf(&w, &l, 0.0);
    let best = golden_max(|t| a * t - (log_mgf(&w, &l, t) - base), 0.0, 1.0, T_TOLERANCE);
    Ok(ChernoffSup {
        value: best.value,
        argmax_t: best.argmax,
    })
}

/// Output of [`cumulant_bound_audit`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CumulantAudit {
    pub n: usize,
    pub a: f64,
    /// `sup_t (n a t − log Σ_i P_ρ(i) P_σ(i)^{−t})` on the measured outcomes.
    pub lhs: f64,
    pub lhs_argmax_t: f64,
    /// `n·sup_t(a t − t (k−1) log(n+1)/n − log Tr rho sigma^{−t})`.
    pub rhs: f64,
    /// The same with `(k+1)` in place of `(k−1)`.
    pub rhs_alt: f64,
    pub bound_ok: bool,
    /// `P_ρ{−(1/n) log P_σ(i) >= a}`.
    pub tail_probability: f64,
    /// `exp(−lhs)`.
    pub markov_bound: f64,
    pub markov_ok: bool,
}

/// Slack on `lhs >= rhs`.
pub const CUMULANT_SLACK: f64 = 1e-6;

pub fn cumulant_bound_audit(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    a: f64,
    n: usize,
    limits: &Limits,
) -> Result<CumulantAudit> {
    let m = stein_measurement(sigma, n, limits)?;
    let refined = rank_one_refinement(rho, &m)?;
    cumulant_on(rho, sigma, a, &refined)
}

/// [`cumulant_bound_audit`] on an already refined measurement.
pub fn cumulant_on(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    a: f64,
    refined: &RankOneRefinement,
) -> Result<CumulantAudit> {
    let n = refined.n;
    let nf = n as f64;
    let k = sigma.dim() as f64;
    let total: f64 = refined.p_rho.iter().sum();
    let p: Vec<f64> = refined.p_rho.iter().map(|x| x / total).collect();
    let lhs = golden_max(
        |t| nf * a * t - log_mgf(&p, &refined.log_p_sigma, t),
        0.0,
        1.0,
        T_TOLERANCE,
    );
    let correction = (nf + 1.0).ln() / nf;
    let rhs = nf * chernoff_sup(rho, sigma, a - (k - 1.0) * correction)?.value;
    let rhs_alt = nf * chernoff_sup(rho, sigma, a - (k + 1.0) * correction)?.value;
    let tail: f64 = p
        .iter()
        .zip(&refined.log_p_sigma)
        .filter(|(_, &lq)| -lq / nf >= a)
        .map(|(&pi, _)| pi)
        .sum();
    let markov_bound = (-lhs.value).exp();
    Ok(CumulantAudit {
        n,
        a,
        lhs: lhs.value,
        lhs_argmax_t: lhs.argmax,
        rhs,
        rhs_alt,
        bound_ok: lhs.value >= rhs - CUMULANT_SLACK,
        tail_probability: tail,
        markov_bound,
        markov_ok: tail <= markov_bound * (1.0 + 1e-12),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_density, Substream};

    #[test]
    fn maximally_mixed_has_no_deviation() {
        let s = DensityMatrix::maximally_mixed(2);
        let rows = spectrum_convergence_audit(&s, &s, &[1, 2, 3, 4], ConvergenceOptions::default(), &Limits::default())
            .unwrap();
        for r in rows {
            assert!(r.deviation_probability == 0.0 && r.variance < 1e-24, "{r:?}");
            assert!(r.dd_measured < 1e-14 && r.dd_ok);
        }
    }

    #[test]
    fn refinement_preserves_rho_mass() {
        let mut rng = Substream::new(91, "refine-mass").rng();
        let rho = random_density(&mut rng, 2);
        let sigma = random_density(&mut rng, 2);
        let m = stein_measurement(&sigma, 4, &Limits::default()).unwrap();
        let r = rank_one_refinement(&rho, &m).unwrap();
        assert_eq!(r.p_rho.len(), 16);
        assert!((r.p_rho.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let sigma_mass: f64 = r.log_p_sigma.iter().map(|l| l.exp()).sum();
        assert!((sigma_mass - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dd_identity_and_variance_bound() {
        let mut rng = Substream::new(92, "dd-variance").rng();
        let rho = random_density(&mut rng, 2);
        let sigma = random_density(&mut rng, 2);
        let n_range: Vec<usize> = (2..=8).collect();
        let rows =
            spectrum_convergence_audit(&rho, &sigma, &n_range, ConvergenceOptions::default(), &Limits::default()).unwrap();
        for r in rows {
            assert!(r.dd_gap.unwrap() <= DD_TOLERANCE, "{r:?}");
            assert!(r.variance_ok, "{r:?}");
        }
    }

    #[test]
    fn chernoff_closed_forms() {
        let s = DensityMatrix::maximally_mixed(2);
        let l2 = 2.0f64.ln();
        let c = chernoff_sup(&s, &s, 2.0 * l2).unwrap();
        assert!((c.value - l2).abs() < 1e-12 && (c.argmax_t - 1.0).abs() < 1e-12);
        for a in [-1.0, 0.3, 0.9] {
            let v = chernoff_sup(&s, &s, a).unwrap().value;
            assert!((v - (a - l2).max(0.0)).abs() < 1e-9);
        }
    }

    #[test]
    fn chernoff_objective_is_concave() {
        let mut rng = Substream::new(93, "chernoff-concave").rng();
        for _ in 0..100 {
            let rho = random_density(&mut rng, 3);
            let sigma = random_density(&mut rng, 3);
            let f = |t: f64| -log_trace_power(&rho, &sigma, t).unwrap();
            assert!(f(0.5) >= 0.5 * (f(0.0) + f(1.0)) - 1e-12);
            assert!(chernoff_sup(&rho, &sigma, -0.5).unwrap().value >= 0.0);
        }
    }

    #[test]
    fn cumulant_cases() {
        let s = DensityMatrix::maximally_mixed(2);
        let low = cumulant_bound_audit(&s, &s, -10.0, 3, &Limits::default()).unwrap();
        assert!(low.lhs >= 0.0 && low.rhs >= 0.0 && low.lhs_argmax_t == 0.0);
        assert!((low.markov_bound - 1.0).abs() < 1e-15 && low.markov_ok);

        let mut rng = Substream::new(94, "cumulant-positive").rng();
        let rho = random_density(&mut rng, 2);
        let sigma = random_density(&mut rng, 2);
        let cross = -mean_log(&rho, &sigma).unwrap();
        let n = 6;
        let correction = 7.0f64.ln() / n as f64;
        // below the finite-n correction the sup sits at t = 0
        let inside = cumulant_bound_audit(&rho, &sigma, cross + 0.5 * correction, n, &Limits::default()).unwrap();
        assert_eq!(inside.rhs, 0.0);
        let audit = cumulant_bound_audit(&rho, &sigma, cross + correction + 0.2, n, &Limits::default()).unwrap();
        assert!(audit.rhs > 0.0, "{audit:?}");
        assert!(audit.bound_ok && audit.markov_ok);
        assert!(audit.rhs_alt <= audit.rhs);
    }
}
