//! `max Σ p_i (log p_i)^2` over the probability simplex.

use serde::{Deserialize, Serialize};

use crate::numeric::golden_max;
use crate::{Error, Result};

fn plog2(p: f64) -> f64 {
    if p > 0.0 {
        p * p.ln().powi(2)
    } else {
        0.0
    }
}

/// `Σ p (log p)^2`.
pub fn sum_plog2(probs: &[f64]) -> f64 {
    probs.iter().map(|&p| plog2(p)).sum()
}

/// Closed-form maximum of `Σ p (log p)^2` over `k` outcomes.
///
/// `(log k)^2` for `k >= 3`; for `k = 2` the maximum is attained at
/// `p = (1 − sqrt(1 − 4/e^2)) / 2` and exceeds `(log 2)^2`.
pub fn max_plog2(k: usize) -> Result<f64> {
    match k {
        0 | 1 => Err(Error::InvalidArgument(format!("k = {k} must be >= 2"))),
        2 => {
            let e2 = std::f64::consts::E.powi(2);
            let p = (1.0 - (1.0 - 4.0 / e2).sqrt()) / 2.0;
            Ok(plog2(p) + plog2(1.0 - p))
        }
        _ => Ok((k as f64).ln().powi(2)),
    }
}

/// Stationary point with `r` coordinates at `x/e` and `s − r` at `1/(e x)`,
/// where `x` solves `r x^2 − e x + s − r = 0` on a face of size `s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KktCandidate {
    pub support: usize,
    pub r: usize,
    pub x: f64,
    pub value: f64,
}

/// Two-level stationary points of `Σ p (log p)^2` in the relative interior
/// of a face with `support` coordinates; empty when every discriminant
/// `e^2 − 4 r (support − r)` is negative.
pub fn kkt_candidates(support: usize) -> Vec<KktCandidate> {
    let e = std::f64::consts::E;
    let mut out = Vec::new();
    for r in 1..support {
        let (rf, rest) = (r as f64, (support - r) as f64);
        let disc = e * e - 4.0 * rf * rest;
        if disc < 0.0 {
            continue;
        }
        for x in [(e + disc.sqrt()) / (2.0 * rf), (e - disc.sqrt()) / (2.0 * rf)] {
            if !(x > 0.0) {
                continue;
            }
            let (hi, lo) = (x / e, 1.0 / (e * x));
            if !(0.0..=1.0).contains(&hi) || !(0.0..=1.0).contains(&lo) {
                continue;
            }
            out.push(KktCandidate {
                support,
                r,
                x,
                value: rf * plog2(hi) + rest * plog2(lo),
            });
        }
    }
    out
}

/// Independent evaluation of [`max_plog2`]: enumerate uniform vertex/face
/// candidates and two-level stationary points on every face size, plus a
/// grid of `grid` points refined by golden-section search when `k = 2`.
pub fn max_plog2_oracle(k: usize, grid: usize) -> Result<f64> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("k = {k} must be >= 2")));
    }
    let mut best: f64 = 0.0;
    for support in 1..=k {
        best = best.max(sum_plog2(&vec![1.0 / support as f64; support]));
        for cand in kkt_candidates(support) {
            best = best.max(cand.value);
        }
    }
    if k == 2 {
        let f = |p: f64| plog2(p) + plog2(1.0 - p);
        let steps = grid.max(2);
        let h = 1.0 / steps as f64;
        let (mut arg, mut val) = (0.0, f(0.0));
        for i in 1..=steps {
            let p = i as f64 * h;
            let v = f(p);
            if v > val {
                arg = p;
                val = v;
            }
        }
        let refined = golden_max(f, (arg - h).max(0.0), (arg + h).min(1.0), 1e-12);
        best = best.max(refined.value).max(val);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        assert!((max_plog2(3).unwrap() - 1.206949).abs() < 1e-6);
        assert!((max_plog2(4).unwrap() - 4f64.ln().powi(2)).abs() < 1e-15);
        assert!((max_plog2(2).unwrap() - 0.56288).abs() < 1e-5);
        assert!(max_plog2(2).unwrap() > 2f64.ln().powi(2));
        assert!(max_plog2(1).is_err());
    }

    #[test]
    fn oracle_agrees() {
        for k in 2..=6 {
            let a = max_plog2(k).unwrap();
            let b = max_plog2_oracle(k, 1_000_000).unwrap();
            assert!((a - b).abs() < 1e-6, "k = {k}: {a} vs {b}");
        }
    }

    #[test]
    fn no_interior_candidates_for_four_outcomes() {
        assert!(kkt_candidates(4).is_empty());
        // two outcomes: r = 1 gives the interior maximiser
        assert!(!kkt_candidates(2).is_empty());
    }

    #[test]
    fn grid_search_on_binary_simplex() {
        let f = |p: f64| plog2(p) + plog2(1.0 - p);
        let best = (0..=1_000_000)
            .map(|i| f(i as f64 * 1e-6))
            .fold(0.0_f64, f64::max);
        assert!((best - max_plog2(2).unwrap()).abs() < 1e-6);
    }
}
