use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Numerical tolerances shared by constructors and validity checks.
///
/// Constructors symmetrize, clamp and renormalize inputs that violate a
/// tolerance by less than `reject_factor` times that tolerance, and reject
/// anything worse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub herm: f64,
    pub proj: f64,
    pub psd: f64,
    pub trace: f64,
    pub reject_factor: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            herm: 1e-9,
            proj: 1e-9,
            psd: 1e-10,
            trace: 1e-9,
            reject_factor: 1e6,
        }
    }
}

/// Size limits for dense tensor-power constructions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Limits {
    /// Largest Hilbert-space dimension that may be materialised.
    pub max_dim: usize,
    /// Largest `n` for which an `n!` sum over the symmetric group is allowed.
    pub max_factorial_n: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            max_dim: 4096,
            max_factorial_n: 8,
        }
    }
}

impl Limits {
    /// Hard ceiling on `max_dim` accepted from configuration.
    pub const MAX_DIM_CEILING: usize = 1 << 20;

    pub fn with_max_dim(max_dim: usize) -> Self {
        Self {
            max_dim,
            ..Self::default()
        }
    }

    /// `k^n`, or an error if it exceeds the dimension budget.
    pub fn check_power(&self, k: usize, n: usize) -> Result<usize> {
        let mut dim: usize = 1;
        for _ in 0..n {
            dim = dim.checked_mul(k).filter(|&d| d <= self.max_dim).ok_or(
                Error::BudgetExceeded {
                    requested: k.saturating_pow(n as u32),
                    limit: self.max_dim,
                },
            )?;
        }
        Ok(dim)
    }

    pub fn check_factorial(&self, n: usize) -> Result<()> {
        if n > self.max_factorial_n {
            return Err(Error::FactorialBudget {
                n,
                limit: self.max_factorial_n,
            });
        }
        Ok(())
    }
}
