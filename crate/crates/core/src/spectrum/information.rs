//! Distribution of the normalised log-likelihood ratio `(1/n) log(p_n/q_n)`
//! under i.i.d. `p^{⊗n}`, and the threshold tests built on it.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::distribution::{classical_errors, ClassicalTest, FiniteDistribution};
use crate::random::Substream;
use crate::testing::ErrorPair;
use crate::{Error, Result};

/// One support point of a [`SpectrumCdf`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumPoint {
    /// Value of `(1/n) log(p_n/q_n)`.
    pub lambda: f64,
    /// `p^{⊗n}`-mass of the outcomes at this value.
    pub p_mass: f64,
    /// `q^{⊗n}`-mass of the same outcomes.
    pub q_mass: f64,
}

/// Log-likelihood spectrum with strictly increasing support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumCdf {
    n: usize,
    points: Vec<SpectrumPoint>,
    exact: bool,
}

/// Knobs for [`iid_log_ratio_spectrum_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumOptions {
    /// Support points closer than this (on the un-normalised sum scale) merge.
    pub resolution: f64,
    /// Above this many support points the exact convolution is abandoned.
    pub max_support: usize,
    pub mc_samples: usize,
    pub seed: u64,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self {
            resolution: 1e-12,
            max_support: 1_000_000,
            mc_samples: 1_000_000,
            seed: 0,
        }
    }
}

impl SpectrumCdf {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn points(&self) -> &[SpectrumPoint] {
        &self.points
    }

    /// `false` when the Monte Carlo fallback produced the spectrum.
    pub fn is_exact(&self) -> bool {
        self.exact
    }

    pub fn total_p_mass(&self) -> f64 {
        self.points.iter().map(|pt| pt.p_mass).sum()
    }

    /// Expectation of `(1/n) log(p_n/q_n)` under `p^{⊗n}`.
    pub fn mean(&self) -> f64 {
        self.points.iter().map(|pt| pt.lambda * pt.p_mass).sum()
    }

    pub fn p_mass_below(&self, lambda: f64) -> f64 {
        self.points
            .iter()
            .filter(|pt| pt.lambda < lambda)
            .map(|pt| pt.p_mass)
            .sum()
    }

    pub fn p_mass_at_or_above(&self, lambda: f64) -> f64 {
        self.points
            .iter()
            .filter(|pt| pt.lambda >= lambda)
            .map(|pt| pt.p_mass)
            .sum()
    }

    pub fn q_mass_at_or_above(&self, lambda: f64) -> f64 {
        self.points
            .iter()
            .filter(|pt| pt.lambda >= lambda)
            .map(|pt| pt.q_mass)
            .sum()
    }
}

/// Single-letter support: `(log p/q, p, q)` for letters charged by `p`.
fn letters(p: &FiniteDistribution, q: &FiniteDistribution) -> Result<Vec<(f64, f64, f64)>> {
    p.check_labels(q)?;
    let mut out = Vec::new();
    for (&pi, &qi) in p.probs().iter().zip(q.probs()) {
        if pi == 0.0 {
            continue;
        }
        if qi == 0.0 {
            return Err(Error::SupportViolation);
        }
        out.push(((pi / qi).ln(), pi, qi));
    }
    Ok(out)
}

/// Sorts by value and merges neighbours within `resolution`, placing the
/// merged point at the `p`-weighted mean (which keeps the mean exact).
fn merge(mut pts: Vec<(f64, f64, f64)>, resolution: f64) -> Vec<(f64, f64, f64)> {
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64, f64)> = Vec::with_capacity(pts.len());
    let mut anchor = f64::NEG_INFINITY;
    for (x, pm, qm) in pts {
        match out.last_mut() {
            Some(last) if x - anchor <= resolution => {
                let total = last.1 + pm;
                last.0 = (last.0 * last.1 + x * pm) / total;
                last.1 = total;
                last.2 += qm;
            }
            _ => {
                anchor = x;
                out.push((x, pm, qm));
            }
        }
    }
    out
}

/// Exact spectrum by `n`-fold convolution with value merging at `1e-12`.
pub fn iid_log_ratio_spectrum(
    p: &FiniteDistribution,
    q: &FiniteDistribution,
    n: usize,
) -> Result<SpectrumCdf> {
    iid_log_ratio_spectrum_with(p, q, n, &SpectrumOptions::default())
}

pub fn iid_log_ratio_spectrum_with(
    p: &FiniteDistribution,
    q: &FiniteDistribution,
    n: usize,
    opts: &SpectrumOptions,
) -> Result<SpectrumCdf> {
    if n == 0 {
        return Err(Error::InvalidArgument("spectrum needs n >= 1".into()));
    }
    let single = letters(p, q)?;
    let mut acc = merge(single.clone(), opts.resolution);
    for _ in 1..n {
        let mut next = Vec::with_capacity(acc.len() * single.len());
        for &(x, pm, qm) in &acc {
            for &(y, pl, ql) in &single {
                next.push((x + y, pm * pl, qm * ql));
            }
        }
        acc = merge(next, opts.resolution);
        if acc.len() > opts.max_support {
            return Ok(monte_carlo(&single, n, opts));
        }
    }
    let nf = n as f64;
    let points = acc
        .into_iter()
        .map(|(x, p_mass, q_mass)| SpectrumPoint {
            lambda: x / nf,
            p_mass,
            q_mass,
        })
        .collect();
    Ok(SpectrumCdf {
        n,
        points,
        exact: true,
    })
}

/// Seeded sampling of `p^{⊗n}`; `q`-masses follow from the identity
/// `q_n = p_n e^{−n λ}` on every outcome.
fn monte_carlo(single: &[(f64, f64, f64)], n: usize, opts: &SpectrumOptions) -> SpectrumCdf {
    let mut rng = Substream::new(opts.seed, "spectrum-monte-carlo").rng();
    let mut cumulative = Vec::with_capacity(single.len());
    let mut running = 0.0;
    for &(_, pl, _) in single {
        running += pl;
        cumulative.push(running);
    }
    let nf = n as f64;
    let weight = 1.0 / opts.mc_samples as f64;
    let mut samples = Vec::with_capacity(opts.mc_samples);
    for _ in 0..opts.mc_samples {
        let mut sum = 0.0;
        for _ in 0..n {
            let u: f64 = rng.random::<f64>() * running;
            let idx = cumulative.partition_point(|&c| c <= u).min(single.len() - 1);
            sum += single[idx].0;
        }
        samples.push((sum, weight, weight * (-sum).exp()));
    }
    let points = merge(samples, opts.resolution)
        .into_iter()
        .map(|(x, p_mass, q_mass)| SpectrumPoint {
            lambda: x / nf,
            p_mass,
            q_mass,
        })
        .collect();
    SpectrumCdf {
        n,
        points,
        exact: false,
    }
}

/// Error probabilities of the threshold test `S_n(λ)` and its guarantee.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct STestOutcome {
    pub n: usize,
    pub lambda: f64,
    pub errors: ErrorPair,
    /// `p^{⊗n}`-mass of the acceptance region.
    pub accepted_p_mass: f64,
    /// `e^{−nλ}`.
    pub beta_bound: f64,
    /// `e^{−nλ}·(accepted p-mass)`, the sharper form of the bound.
    pub refined_bound: f64,
    /// `β <= e^{−nλ}`, with no tolerance.
    pub bound_ok: bool,
}

/// Accepts `{ (1/n) log(p_n/q_n) >= λ }` and reports its errors.
pub fn s_test(p: &FiniteDistribution, q: &FiniteDistribution, n: usize, lambda: f64) -> Result<STestOutcome> {
    let spec = iid_log_ratio_spectrum(p, q, n)?;
    Ok(s_test_on(&spec, lambda))
}

/// [`s_test`] on a precomputed spectrum.
pub fn s_test_on(spec: &SpectrumCdf, lambda: f64) -> STestOutcome {
    let accepted_p_mass = spec.p_mass_at_or_above(lambda);
    let beta = spec.q_mass_at_or_above(lambda);
    let errors = ErrorPair::new(1.0 - accepted_p_mass, beta);
    let beta_bound = (-(spec.n as f64) * lambda).exp();
    STestOutcome {
        n: spec.n,
        lambda,
        errors,
        accepted_p_mass,
        beta_bound,
        refined_bound: beta_bound * accepted_p_mass,
        bound_ok: errors.beta <= beta_bound,
    }
}

/// The test `S_n(λ)` as an explicit indicator over the product alphabet.
pub fn s_test_classical(
    p: &FiniteDistribution,
    q: &FiniteDistribution,
    n: usize,
    lambda: f64,
) -> Result<ClassicalTest> {
    p.check_labels(q)?;
    let pn = p.power(n);
    let qn = q.power(n);
    let accept = pn
        .probs()
        .iter()
        .zip(qn.probs())
        .map(|(&a, &b)| {
            if a == 0.0 {
                0.0
            } else if b == 0.0 {
                1.0
            } else if (a / b).ln() / n as f64 >= lambda {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    ClassicalTest::new(pn.labels().to_vec(), accept)
}

/// Outcome of [`np_dominance_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DominanceCheck {
    /// `α(A(λ)) + e^{nλ} β(A(λ))`.
    pub threshold_cost: f64,
    /// `α(A) + e^{nλ} β(A)` for the challenger.
    pub challenger_cost: f64,
    pub passed: bool,
}

/// Verifies that the threshold test minimises `α + e^{nλ} β` against `a`.
pub fn np_dominance_check(
    p: &FiniteDistribution,
    q: &FiniteDistribution,
    n: usize,
    lambda: f64,
    a: &ClassicalTest,
) -> Result<DominanceCheck> {
    let pn = p.power(n);
    let qn = q.power(n);
    let weight = (n as f64 * lambda).exp();
    let s = s_test_classical(p, q, n, lambda)?;
    let own = classical_errors(&s, &pn, &qn)?;
    let other = classical_errors(a, &pn, &qn)?;
    let threshold_cost = own.alpha + weight * own.beta;
    let challenger_cost = other.alpha + weight * other.beta;
    Ok(DominanceCheck {
        threshold_cost,
        challenger_cost,
        passed: threshold_cost <= challenger_cost + 1e-10,
    })
}

/// Finite-`n` surrogates for the lower and upper spectral rates.
///
/// `lower` is the largest `λ` with `p-mass{spectrum < λ} <= η`; `upper` is
/// the smallest `λ` with `p-mass{spectrum > λ} <= η`.
pub fn finite_n_spectrum_bounds(
    p: &FiniteDistribution,
    q: &FiniteDistribution,
    n: usize,
    eta: f64,
) -> Result<(f64, f64)> {
    let spec = iid_log_ratio_spectrum(p, q, n)?;
    spectrum_bounds_on(&spec, eta)
}

pub fn spectrum_bounds_on(spec: &SpectrumCdf, eta: f64) -> Result<(f64, f64)> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::InvalidArgument(format!("eta = {eta} outside (0, 1)")));
    }
    let pts = &spec.points;
    let mut cumulative = 0.0;
    let mut lower = pts[pts.len() - 1].lambda;
    for pt in pts {
        cumulative += pt.p_mass;
        if cumulative > eta {
            lower = pt.lambda;
            break;
        }
    }
    let mut tail = 0.0;
    let mut upper = pts[0].lambda;
    for pt in pts.iter().rev() {
        tail += pt.p_mass;
        if tail > eta {
            upper = pt.lambda;
            break;
        }
    }
    Ok((lower, upper))
}
