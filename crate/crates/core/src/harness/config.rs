//! Experiment configuration: JSON documents whose states are either inline
//! matrices or paths to matrix files.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize};

use crate::opcore::exchange::{self, MatrixJson};
use crate::opcore::{DensityMatrix, HermitianOperator};
use crate::{Error, Limits, Result, Tolerances};

/// Environment variable overriding the default dimension budget.
pub const DIM_BUDGET_ENV: &str = "STEIN_LAB_DIM_BUDGET";

/// A state given inline or by reference to a matrix file.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum MatrixSource {
    Path(String),
    Inline(MatrixJson),
}

impl<'de> Deserialize<'de> for MatrixSource {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        match serde_json::Value::deserialize(d)? {
            serde_json::Value::String(path) => Ok(Self::Path(path)),
            other => serde_json::from_value(other)
                .map(Self::Inline)
                .map_err(|e| D::Error::custom(format!("inline matrix: {e}"))),
        }
    }
}

impl MatrixSource {
    pub fn inline(m: &crate::CMatrix) -> Self {
        Self::Inline(MatrixJson::from_matrix(m))
    }

    /// Loads and validates the state; relative paths resolve against `base`.
    pub fn load(&self, field: &str, base: Option<&Path>, tol: &Tolerances) -> Result<DensityMatrix> {
        let matrix = match self {
            Self::Path(p) => {
                let path = match base {
                    Some(dir) if Path::new(p).is_relative() => dir.join(p),
                    _ => PathBuf::from(p),
                };
                let text = std::fs::read_to_string(&path).map_err(|e| Error::Parse {
                    context: format!("field `{field}`"),
                    message: format!("cannot read {}: {e}", path.display()),
                })?;
                exchange::parse_matrix(&text, &format!("{} (field `{field}`)", path.display()))?
            }
            Self::Inline(doc) => doc.to_matrix(&format!("field `{field}`"))?,
        };
        let op = HermitianOperator::with_tolerances(matrix, tol)?;
        DensityMatrix::with_tolerances(op, tol)
    }
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub rho: Option<MatrixSource>,
    pub sigma: Option<MatrixSource>,
    pub n_min: usize,
    pub n_max: usize,
    /// Type-I level for the Neyman–Pearson optimum.
    pub epsilon: f64,
    /// Margin below `D(rho‖sigma)` for the likelihood-ratio threshold.
    pub epsilon_margin: f64,
    /// Mass level of the finite-`n` spectral bounds.
    pub eta: f64,
    /// Deviation level of the convergence audit.
    pub delta: f64,
    pub seed: u64,
    /// Largest materialised dimension; `None` uses the environment or 4096.
    pub dim_budget: Option<usize>,
    pub tolerances: Tolerances,
    #[serde(skip)]
    base_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            rho: None,
            sigma: None,
            n_min: 1,
            n_max: 8,
            epsilon: 0.1,
            epsilon_margin: 0.1,
            eta: 0.05,
            delta: 0.1,
            seed: 42,
            dim_budget: None,
            tolerances: Tolerances::default(),
            base_dir: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str, context: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            context: context.to_string(),
            message: e.to_string(),
        })
    }

    /// Reads a config file; state paths inside it are relative to the file.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut config = Self::from_json(&text, &path.display().to_string())?;
        config.base_dir = path.parent().map(Path::to_path_buf);
        Ok(config)
    }

    pub fn with_states(mut self, rho: &DensityMatrix, sigma: &DensityMatrix) -> Self {
        self.rho = Some(MatrixSource::inline(rho.matrix()));
        self.sigma = Some(MatrixSource::inline(sigma.matrix()));
        self
    }

    pub fn n_range(&self) -> Vec<usize> {
        (self.n_min..=self.n_max).collect()
    }

    pub fn limits(&self) -> Limits {
        Limits::with_max_dim(self.dim_budget.unwrap_or(Limits::default().max_dim))
    }

    /// Fills `dim_budget` from [`DIM_BUDGET_ENV`] when the config leaves it unset.
    pub fn apply_env_budget(&mut self) -> Result<()> {
        if self.dim_budget.is_some() {
            return Ok(());
        }
        if let Ok(raw) = std::env::var(DIM_BUDGET_ENV) {
            let value = raw.trim().parse::<usize>().map_err(|e| Error::Parse {
                context: DIM_BUDGET_ENV.to_string(),
                message: format!("`{raw}`: {e}"),
            })?;
            self.dim_budget = Some(value);
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.n_min == 0 || self.n_min > self.n_max {
            return bad(format!("need 1 <= n_min <= n_max, got {}..{}", self.n_min, self.n_max));
        }
        for (name, v) in [
            ("epsilon", self.epsilon),
            ("epsilon_margin", self.epsilon_margin),
            ("eta", self.eta),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return bad(format!("{name} = {v} outside (0, 1)"));
            }
        }
        if !(self.delta > 0.0) {
            return bad(format!("delta = {} must be > 0", self.delta));
        }
        if let Some(b) = self.dim_budget {
            if b == 0 || b > Limits::MAX_DIM_CEILING {
                return bad(format!("dim_budget = {b} outside 1..={}", Limits::MAX_DIM_CEILING));
            }
        }
        let t = &self.tolerances;
        if [t.herm, t.proj, t.psd, t.trace].iter().any(|&x| !(x > 0.0)) || !(t.reject_factor >= 1.0) {
            return bad("tolerances must be positive and reject_factor >= 1".into());
        }
        Ok(())
    }

    /// Loads `(rho, sigma)`, which both must be present and of equal dimension.
    pub fn states(&self) -> Result<(DensityMatrix, DensityMatrix)> {
        let base = self.base_dir.as_deref();
        let missing = |f: &str| Error::InvalidArgument(format!("config field `{f}` is required"));
        let rho = self.rho.as_ref().ok_or_else(|| missing("rho"))?.load("rho", base, &self.tolerances)?;
        let sigma = self
            .sigma
            .as_ref()
            .ok_or_else(|| missing("sigma"))?
            .load("sigma", base, &self.tolerances)?;
        if rho.dim() != sigma.dim() {
            return Err(Error::DimensionMismatch {
                left: rho.dim(),
                right: sigma.dim(),
            });
        }
        Ok((rho, sigma))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_inline_states() {
        let text = r#"{
            "rho": {"dim": 2, "re": [[0.7, 0.0], [0.0, 0.3]]},
            "sigma": {"dim": 2, "re": [[0.3, 0.0], [0.0, 0.7]]},
            "n_max": 4
        }"#;
        let c = ExperimentConfig::from_json(text, "inline").unwrap();
        c.validate().unwrap();
        assert_eq!(c.n_range(), vec![1, 2, 3, 4]);
        assert_eq!(c.seed, 42);
        let (rho, sigma) = c.states().unwrap();
        assert!((rho.matrix()[(0, 0)].re - 0.7).abs() < 1e-15);
        assert_eq!(sigma.dim(), 2);
    }

    #[test]
    fn validation_errors() {
        let mut c = ExperimentConfig::default();
        c.n_min = 5;
        c.n_max = 4;
        assert!(c.validate().is_err());
        let mut c = ExperimentConfig::default();
        c.epsilon_margin = 1.5;
        assert!(c.validate().is_err());
        let mut c = ExperimentConfig::default();
        c.dim_budget = Some(1 << 21);
        assert!(c.validate().is_err());
        assert!(ExperimentConfig::default().states().is_err());
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let err = ExperimentConfig::from_json(r#"{"n_maxx": 3}"#, "cfg").unwrap_err();
        assert!(err.to_string().contains("n_maxx"), "{err}");
        let err = ExperimentConfig::from_json(r#"{"tolerances": {"hermm": 1e-9}}"#, "cfg").unwrap_err();
        assert!(err.to_string().contains("hermm"), "{err}");
    }

    #[test]
    fn relative_paths_resolve_against_the_config() {
        let dir = tempfile::tempdir().unwrap();
        let state = DensityMatrix::diagonal(&[0.6, 0.4]).unwrap();
        exchange::write_matrix(&dir.path().join("rho.json"), state.matrix()).unwrap();
        let cfg = dir.path().join("cfg.json");
        std::fs::write(&cfg, r#"{"rho": "rho.json", "sigma": "rho.json"}"#).unwrap();
        let c = ExperimentConfig::from_file(&cfg).unwrap();
        let (rho, _) = c.states().unwrap();
        assert!((rho.matrix()[(1, 1)].re - 0.4).abs() < 1e-15);
    }
}
