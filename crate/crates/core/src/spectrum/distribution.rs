use serde::{Deserialize, Serialize};

use crate::testing::ErrorPair;
use crate::{Error, Result, Tolerances};

/// Tolerance on `Σ p = 1` for distributions built directly from numbers.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// Probability vector over a finite labelled alphabet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteDistribution {
    labels: Vec<String>,
    probs: Vec<f64>,
}

impl FiniteDistribution {
    pub fn new(labels: Vec<String>, probs: Vec<f64>) -> Result<Self> {
        if labels.len() != probs.len() {
            return Err(Error::DimensionMismatch {
                left: labels.len(),
                right: probs.len(),
            });
        }
        if probs.is_empty() {
            return Err(Error::InvalidArgument("empty distribution".into()));
        }
        if let Some(&bad) = probs.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(Error::InvalidArgument(format!("invalid probability {bad}")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::NotNormalized { total });
        }
        Ok(Self { labels, probs })
    }

    /// Distribution with labels `"0"`, `"1"`, ….
    pub fn from_probs(probs: Vec<f64>) -> Result<Self> {
        let labels = (0..probs.len()).map(|i| i.to_string()).collect();
        Self::new(labels, probs)
    }

    /// Clamps outcome probabilities to `[0, 1]` and renormalises when the
    /// total is within `reject_factor·trace` of one.
    pub fn from_measurement(labels: Vec<String>, probs: Vec<f64>, tol: &Tolerances) -> Result<Self> {
        let clamped: Vec<f64> = probs.into_iter().map(|p| p.clamp(0.0, 1.0)).collect();
        let total: f64 = clamped.iter().sum();
        if !((total - 1.0).abs() <= tol.trace * tol.reject_factor) {
            return Err(Error::NotNormalized { total });
        }
        let probs = clamped.into_iter().map(|p| p / total).collect();
        Self::new(labels, probs)
    }

    pub fn uniform(k: usize) -> Result<Self> {
        Self::from_probs(vec![1.0 / k as f64; k])
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Product distribution over pairs; labels are joined with `.`.
    pub fn product(&self, other: &FiniteDistribution) -> FiniteDistribution {
        let mut labels = Vec::with_capacity(self.len() * other.len());
        let mut probs = Vec::with_capacity(self.len() * other.len());
        for (a, pa) in self.labels.iter().zip(&self.probs) {
            for (b, pb) in other.labels.iter().zip(&other.probs) {
                labels.push(format!("{a}.{b}"));
                probs.push(pa * pb);
            }
        }
        FiniteDistribution { labels, probs }
    }

    /// `p^{⊗n}` with lexicographic outcome order.
    pub fn power(&self, n: usize) -> FiniteDistribution {
        let mut out = self.clone();
        for _ in 1..n {
            out = out.product(self);
        }
        out
    }

    pub(crate) fn check_labels(&self, other: &FiniteDistribution) -> Result<()> {
        if self.labels != other.labels {
            return Err(Error::LabelMismatch);
        }
        Ok(())
    }
}

/// `D(p || q) = Σ p log(p/q)`; `+∞` when `p` charges an outcome `q` does not.
pub fn kl_divergence(p: &FiniteDistribution, q: &FiniteDistribution) -> Result<f64> {
    p.check_labels(q)?;
    let mut acc = 0.0;
    for (&pi, &qi) in p.probs.iter().zip(&q.probs) {
        if pi == 0.0 {
            continue;
        }
        if qi == 0.0 {
            return Ok(f64::INFINITY);
        }
        acc += pi * (pi / qi).ln();
    }
    Ok(acc.max(0.0))
}

/// Randomised classical test: acceptance probability per outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalTest {
    labels: Vec<String>,
    accept: Vec<f64>,
}

impl ClassicalTest {
    pub fn new(labels: Vec<String>, accept: Vec<f64>) -> Result<Self> {
        if labels.len() != accept.len() {
            return Err(Error::DimensionMismatch {
                left: labels.len(),
                right: accept.len(),
            });
        }
        if let Some(&bad) = accept.iter().find(|a| !(0.0..=1.0).contains(*a)) {
            return Err(Error::InvalidArgument(format!(
                "acceptance probability {bad} outside [0, 1]"
            )));
        }
        Ok(Self { labels, accept })
    }

    pub fn constant(labels: &[String], value: f64) -> Result<Self> {
        Self::new(labels.to_vec(), vec![value; labels.len()])
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn accept(&self) -> &[f64] {
        &self.accept
    }
}

/// `(Σ (1 − A) p, Σ A q)`.
pub fn classical_errors(
    a: &ClassicalTest,
    p: &FiniteDistribution,
    q: &FiniteDistribution,
) -> Result<ErrorPair> {
    if a.labels != p.labels || p.labels != q.labels {
        return Err(Error::LabelMismatch);
    }
    let alpha = a
        .accept
        .iter()
        .zip(&p.probs)
        .map(|(ai, pi)| (1.0 - ai) * pi)
        .sum();
    let beta = a.accept.iter().zip(&q.probs).map(|(ai, qi)| ai * qi).sum();
    Ok(ErrorPair::new(alpha, beta))
}
