//! Exact quantum Neyman–Pearson tests and the optimum `β*_n(ε)`.

use serde::{Deserialize, Serialize};

use crate::opcore::{tensor_power, DensityMatrix, HermitianOperator, Spectral, TestOperator};
use crate::{Error, Limits, Result};

/// Type-I and type-II error probabilities, clamped to `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorPair {
    pub alpha: f64,
    pub beta: f64,
}

impl ErrorPair {
    pub fn new(alpha: f64, beta: f64) -> Self {
        Self {
            alpha: alpha.clamp(0.0, 1.0),
            beta: beta.clamp(0.0, 1.0),
        }
    }
}

/// `(Tr rho_n (I − A), Tr sigma_n A)`.
pub fn error_probabilities(a: &TestOperator, rho_n: &DensityMatrix, sigma_n: &DensityMatrix) -> Result<ErrorPair> {
    rho_n.op().check_dim(sigma_n.dim())?;
    let accept = a.op().trace_product(rho_n.op())?;
    let beta = a.op().trace_product(sigma_n.op())?;
    Ok(ErrorPair::new(1.0 - accept, beta))
}

/// Relative width of the zero-eigenvalue cell of `rho_n − t sigma_n`.
pub const ZERO_CELL_TOL: f64 = 1e-10;

fn difference(rho_n: &DensityMatrix, sigma_n: &DensityMatrix, t: f64) -> Result<Spectral> {
    Ok(rho_n.op().sub(&sigma_n.op().scale(t))?.eigh())
}

fn threshold_projector(spec: &Spectral, cut: f64, boundary_weight: f64) -> TestOperator {
    let weights: Vec<f64> = spec
        .values
        .iter()
        .map(|&v| {
            if v > cut {
                1.0
            } else if v >= -cut {
                boundary_weight
            } else {
                0.0
            }
        })
        .collect();
    let dim = spec.values.len();
    let mut scaled = spec.vectors.clone();
    for (j, w) in weights.iter().enumerate() {
        scaled.column_mut(j).scale_mut(*w);
    }
    let m = scaled * spec.vectors.adjoint();
    debug_assert_eq!(m.nrows(), dim);
    TestOperator::from_trusted(HermitianOperator::from_matrix_unchecked(m))
}

/// Projector onto the positive part of `rho_n − t sigma_n`, plus
/// `boundary_weight` times the projector onto its (near-)zero eigenvalues.
///
/// Minimises `α + t β` over all tests for every boundary weight.
pub fn np_test(
    rho_n: &DensityMatrix,
    sigma_n: &DensityMatrix,
    t: f64,
    boundary_weight: f64,
) -> Result<TestOperator> {
    if !(t >= 0.0) {
        return Err(Error::InvalidArgument(format!("threshold t = {t} must be >= 0")));
    }
    if !(0.0..=1.0).contains(&boundary_weight) {
        return Err(Error::InvalidArgument(format!(
            "boundary weight {boundary_weight} outside [0, 1]"
        )));
    }
    let spec = difference(rho_n, sigma_n, t)?;
    let norm = spec.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    Ok(threshold_projector(&spec, ZERO_CELL_TOL * norm, boundary_weight))
}

/// One point of the Neyman–Pearson trade-off curve.
#[derive(Debug, Clone)]
pub struct NpCurvePoint {
    pub t: f64,
    pub test: TestOperator,
    pub errors: ErrorPair,
}

pub fn np_curve(rho_n: &DensityMatrix, sigma_n: &DensityMatrix, ts: &[f64]) -> Result<Vec<NpCurvePoint>> {
    ts.iter()
        .map(|&t| {
            let test = np_test(rho_n, sigma_n, t, 0.0)?;
            let errors = error_probabilities(&test, rho_n, sigma_n)?;
            Ok(NpCurvePoint { t, test, errors })
        })
        .collect()
}

/// `Tr (rho_n − t sigma_n)_+`.
pub fn positive_part_trace(rho_n: &DensityMatrix, sigma_n: &DensityMatrix, t: f64) -> Result<f64> {
    Ok(difference(rho_n, sigma_n, t)?
        .values
        .iter()
        .filter(|&&v| v > 0.0)
        .sum())
}

/// Lower bound `(1 − ε − Tr(rho_n − t sigma_n)_+)/t` on `β` for any test
/// with `α <= ε`.
pub fn dual_bound(rho_n: &DensityMatrix, sigma_n: &DensityMatrix, eps: f64, t: f64) -> Result<f64> {
    Ok((1.0 - eps - positive_part_trace(rho_n, sigma_n, t)?) / t)
}

/// Result of [`beta_star`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaStar {
    pub beta: f64,
    /// `α` of the returned test (equal to `ε` up to rounding).
    pub alpha: f64,
    /// `β` minus the best dual lower bound found.
    pub certificate_gap: f64,
    pub t: f64,
    pub iterations: usize,
}

const MAX_BISECTIONS: usize = 200;

/// `β*_n(ε) = min { Tr sigma^{⊗n} A : Tr rho^{⊗n}(I − A) <= ε }`.
pub fn beta_star(rho: &DensityMatrix, sigma: &DensityMatrix, n: usize, eps: f64, limits: &Limits) -> Result<BetaStar> {
    sigma.require_full_rank()?;
    rho.op().check_dim(sigma.dim())?;
    let rho_n = tensor_power(rho, n, limits)?;
    let sigma_n = tensor_power(sigma, n, limits)?;
    // σ^⊗n inherits full rank from σ even when its smallest eigenvalue
    // drops below the absolute threshold.
    optimum(&rho_n, &sigma_n, eps)
}

/// [`beta_star`] on already materialised states.
pub fn beta_star_for(rho_n: &DensityMatrix, sigma_n: &DensityMatrix, eps: f64) -> Result<BetaStar> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument(format!("epsilon = {eps} outside (0, 1)")));
    }
    sigma_n.require_full_rank()?;
    optimum(rho_n, sigma_n, eps)
}

fn optimum(rho_n: &DensityMatrix, sigma_n: &DensityMatrix, eps: f64) -> Result<BetaStar> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument(format!("epsilon = {eps} outside (0, 1)")));
    }
    // The strict projector {rho_n − t sigma_n > 0} has α nondecreasing and
    // β nonincreasing in t; bracket ε between two such tests.
    let point = |t: f64| -> Result<(TestOperator, ErrorPair)> {
        let test = threshold_projector(&difference(rho_n, sigma_n, t)?, 0.0, 0.0);
        let errors = error_probabilities(&test, rho_n, sigma_n)?;
        Ok((test, errors))
    };
    let (mut t_lo, mut lo) = (0.0, point(0.0)?);
    if lo.1.alpha > eps {
        // only possible through rounding on the support projector
        lo = (TestOperator::accept_all(rho_n.dim()), ErrorPair::new(0.0, 1.0));
    }
    let mut t_hi = 1.0;
    let mut hi = point(t_hi)?;
    let mut doublings = 0;
    while hi.1.alpha < eps {
        t_lo = t_hi;
        lo = hi;
        t_hi *= 2.0;
        hi = point(t_hi)?;
        doublings += 1;
        if doublings > 1100 {
            return Err(Error::Precondition("could not bracket epsilon".into()));
        }
    }
    let mut iterations = 0;
    while iterations < MAX_BISECTIONS && t_hi - t_lo > 1e-15 * t_hi {
        let mid = 0.5 * (t_lo + t_hi);
        let m = point(mid)?;
        iterations += 1;
        if m.1.alpha <= eps {
            t_lo = mid;
            lo = m;
        } else {
            t_hi = mid;
            hi = m;
        }
    }
    let (alpha, beta) = if hi.1.alpha > lo.1.alpha {
        let gamma = (hi.1.alpha - eps) / (hi.1.alpha - lo.1.alpha);
        let mixed = TestOperator::mix(&lo.0, &hi.0, gamma.clamp(0.0, 1.0))?;
        let e = error_probabilities(&mixed, rho_n, sigma_n)?;
        (e.alpha, e.beta)
    } else {
        (lo.1.alpha, lo.1.beta)
    };
    let mut dual = f64::NEG_INFINITY;
    for t in [t_lo, 0.5 * (t_lo + t_hi), t_hi] {
        if t > 0.0 {
            dual = dual.max(dual_bound(rho_n, sigma_n, eps, t)?);
        }
    }
    Ok(BetaStar {
        beta,
        alpha,
        certificate_gap: beta - dual,
        t: 0.5 * (t_lo + t_hi),
        iterations,
    })
}

/// Classical randomised Neyman–Pearson optimum: accept outcomes in order of
/// decreasing likelihood ratio until the accepted `p`-mass is `1 − ε`,
/// randomising on the boundary outcome.
pub fn classical_beta_star(p: &[f64], q: &[f64], eps: f64) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch {
            left: p.len(),
            right: q.len(),
        });
    }
    let mut order: Vec<usize> = (0..p.len()).filter(|&i| p[i] > 0.0).collect();
    // ratio p/q descending; q = 0 first (infinite ratio)
    order.sort_by(|&a, &b| (p[b] * q[a]).total_cmp(&(p[a] * q[b])));
    let target = 1.0 - eps;
    let mut mass = 0.0;
    let mut beta = 0.0;
    for i in order {
        if mass >= target {
            break;
        }
        let take = ((target - mass) / p[i]).min(1.0);
        mass += take * p[i];
        beta += take * q[i];
    }
    Ok(beta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_density, random_test, Substream};

    fn classical_pair() -> (DensityMatrix, DensityMatrix) {
        (
            DensityMatrix::diagonal(&[0.7, 0.3]).unwrap(),
            DensityMatrix::diagonal(&[0.3, 0.7]).unwrap(),
        )
    }

    #[test]
    fn trivial_tests() {
        let (rho, sigma) = classical_pair();
        let e = error_probabilities(&TestOperator::accept_all(2), &rho, &sigma).unwrap();
        assert_eq!(e, ErrorPair::new(0.0, 1.0));
        let e = error_probabilities(&TestOperator::reject_all(2), &rho, &sigma).unwrap();
        assert_eq!(e, ErrorPair::new(1.0, 0.0));
        let mut rng = Substream::new(71, "errors-same").rng();
        let a = random_test(&mut rng, 2);
        let e = error_probabilities(&a, &rho, &rho).unwrap();
        assert!((e.alpha + e.beta - 1.0).abs() < 1e-14);
    }

    #[test]
    fn classical_threshold_test() {
        let (rho, sigma) = classical_pair();
        let a = np_test(&rho, &sigma, 1.0, 0.0).unwrap();
        let e = error_probabilities(&a, &rho, &sigma).unwrap();
        assert!((e.alpha - 0.3).abs() < 1e-14 && (e.beta - 0.3).abs() < 1e-14);
        let all = np_test(&rho, &sigma, 0.0, 1.0).unwrap();
        assert!(error_probabilities(&all, &rho, &sigma).unwrap().alpha.abs() < 1e-14);
    }

    #[test]
    fn np_test_beats_random_tests() {
        let mut rng = Substream::new(72, "np-optimal").rng();
        let rho = random_density(&mut rng, 2);
        let sigma = random_density(&mut rng, 2);
        for t in [0.5, 1.0, 2.0] {
            let best = error_probabilities(&np_test(&rho, &sigma, t, 0.0).unwrap(), &rho, &sigma).unwrap();
            for _ in 0..1000 {
                let e = error_probabilities(&random_test(&mut rng, 2), &rho, &sigma).unwrap();
                assert!(best.alpha + t * best.beta <= e.alpha + t * e.beta + 1e-12);
            }
        }
    }

    #[test]
    fn curve_is_monotone() {
        let mut rng = Substream::new(73, "np-monotone").rng();
        let limits = Limits::default();
        let rho = tensor_power(&random_density(&mut rng, 2), 3, &limits).unwrap();
        let sigma = tensor_power(&random_density(&mut rng, 2), 3, &limits).unwrap();
        let ts: Vec<f64> = (0..40).map(|i| 0.1 * 1.2f64.powi(i)).collect();
        let curve = np_curve(&rho, &sigma, &ts).unwrap();
        for w in curve.windows(2) {
            assert!(w[1].errors.beta <= w[0].errors.beta + 1e-10);
            assert!(w[1].errors.alpha >= w[0].errors.alpha - 1e-10);
        }
    }

    #[test]
    fn identical_states() {
        let mut rng = Substream::new(74, "beta-same").rng();
        let rho = random_density(&mut rng, 2);
        for eps in [0.1, 0.3] {
            let b = beta_star(&rho, &rho, 2, eps, &Limits::default()).unwrap();
            assert!((b.beta - (1.0 - eps)).abs() < 1e-10, "{b:?}");
        }
    }

    #[test]
    fn classical_single_copy() {
        let (rho, sigma) = classical_pair();
        let b = beta_star(&rho, &sigma, 1, 0.3, &Limits::default()).unwrap();
        assert!((b.beta - 0.3).abs() < 1e-10);
        assert!((classical_beta_star(&[0.7, 0.3], &[0.3, 0.7], 0.3).unwrap() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn certificate_gap_is_small() {
        let mut rng = Substream::new(75, "beta-gap").rng();
        for n in 1..=3 {
            let rho = random_density(&mut rng, 2);
            let sigma = random_density(&mut rng, 2);
            let b = beta_star(&rho, &sigma, n, 0.1, &Limits::default()).unwrap();
            assert!(b.certificate_gap.abs() <= 1e-8, "{b:?}");
            assert!((b.alpha - 0.1).abs() < 1e-10);
        }
    }
}
