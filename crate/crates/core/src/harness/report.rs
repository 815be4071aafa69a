//! Run reports, the invariant registry, and their CSV/JSON emission.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::testing::{ConvergenceRow, CumulantAudit, SteinRunRecord};
use crate::{Error, Result};

/// First line of every CSV file.
pub const CSV_SCHEMA_HEADER: &str = "# stein-lab schema v1";

/// Every inequality the crate asserts, by id.
pub const INVARIANTS: &[(&str, &str)] = &[
    ("opcore.pinching_idempotent", "pinch(pinch(rho)) = pinch(rho) within 1e-10"),
    ("opcore.pinching_trace", "pinching preserves trace within 1e-12"),
    ("opcore.pinching_positive", "pinched state has min eigenvalue >= -1e-12"),
    ("opcore.monotonicity", "D^M(rho||sigma) <= D(rho||sigma) + 1e-9"),
    ("opcore.additivity", "|D(rho^n||sigma^n) - n D| <= n 1e-9"),
    ("opcore.lemma5", "min eig(dim E_M(rho) - rho) >= -1e-10"),
    ("opcore.lemma6_margin", "min eig(w(E) E_M(rho) - rho) >= -1e-10 when [rho, E] = 0"),
    ("opcore.lemma6_inverse_power", "max eig(E_M(rho)^-t - w^t rho^-t) <= 1e-8"),
    ("opcore.lemma3", "Tr rho (log rho - log E_M(rho))^2 <= 4 log^2 w(E) + 1e-9"),
    ("opcore.spectral_pvm", "spectral PVM projector defect <= 1e-9"),
    ("symmetry.character_orthogonality", "sum_classes |C| chi_l chi_m / n! = delta_lm exactly"),
    ("symmetry.isotypic_complete", "isotypic projector defect <= 1e-9"),
    ("symmetry.commutes_with_rho_power", "[P_lambda, rho^n] <= 1e-9"),
    ("symmetry.commutes_with_g_power", "[P_lambda, g^n] <= 1e-9"),
    ("symmetry.dimension_count", "sum d_lambda sl_dim = k^n"),
    ("symmetry.sl_dim_bound", "sl_dim <= (n+1)^(k-1)"),
    ("symmetry.spin_matches_characters", "total-spin and character PVMs coincide"),
    ("symmetry.stein_pvm_refines", "joint PVM refines E^n and E(sigma^n)"),
    ("symmetry.stein_pvm_commutes_sigma", "[joint cells, sigma^n] <= 1e-9"),
    ("testing.np_optimality", "alpha + t beta of the NP test <= that of random tests + 1e-12"),
    ("testing.np_monotone", "beta(A_t) nonincreasing, alpha(A_t) nondecreasing within 1e-10"),
    ("testing.beta_star_gap", "beta_star duality gap <= 1e-8"),
    ("testing.beta_star_classical", "beta_star = classical NP optimum within 1e-10 for commuting pairs"),
    ("testing.beta_star_dominance", "beta_star(alpha_n) <= beta_n of the likelihood-ratio test + 1e-10"),
    ("testing.stein_beta_bound", "beta_n <= exp(-n (D - margin)) exactly"),
    ("testing.stein_rate", "-(1/n) log beta_n >= D - margin"),
    ("testing.dd_identity", "measured and dense (log sigma)^(n) deviations agree within 1e-8"),
    ("testing.variance_bound", "measured log-likelihood variance <= 8((k-1)log(n+1)/n)^2 + 2 Var/n + 1e-8"),
    ("testing.cumulant_bound", "Lambda lhs >= rhs - 1e-6"),
    ("testing.markov", "P{-(1/n) log P_sigma >= a} <= exp(-lhs)"),
    ("testing.chernoff_nonnegative", "sup_t (a t - log Tr rho sigma^-t) >= 0"),
    ("spectrum.mass_and_mean", "spectrum mass = 1 and mean = n D(p||q) within 1e-10"),
    ("spectrum.s_test_bound", "beta_n(S_n(lambda)) <= exp(-n lambda) exactly"),
    ("spectrum.np_dominance", "threshold test minimises alpha + e^(n lambda) beta within 1e-10"),
    ("spectrum.bounds_shrink", "spectral bound interval narrower at n = 64 than at n = 16"),
    ("spectrum.lemma4", "max_plog2 closed form matches the KKT/grid oracle within 1e-6"),
];

pub fn is_registered(id: &str) -> bool {
    INVARIANTS.iter().any(|(name, _)| *name == id)
}

/// One evaluated inequality. `slack >= 0` exactly when it passed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub invariant: String,
    pub instance: String,
    pub value: f64,
    pub bound: f64,
    pub slack: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantSummary {
    pub invariant: String,
    pub instances: usize,
    pub failures: usize,
    pub worst_slack: f64,
}

/// Accumulates check rows; ids must be in [`INVARIANTS`].
#[derive(Debug, Default, Clone)]
pub struct Checks {
    rows: Vec<CheckRow>,
}

impl Checks {
    fn push(&mut self, id: &str, instance: String, value: f64, bound: f64, slack: f64) {
        assert!(is_registered(id), "unregistered invariant `{id}`");
        // NaN slack (from a NaN value) counts as a failure
        let passed = slack >= 0.0;
        self.rows.push(CheckRow {
            invariant: id.to_string(),
            instance,
            value,
            bound,
            slack,
            passed,
        });
    }

    /// Records `value <= bound + tol`.
    pub fn le(&mut self, id: &str, instance: impl Into<String>, value: f64, bound: f64, tol: f64) {
        self.push(id, instance.into(), value, bound, bound + tol - value);
    }

    /// Records `value >= bound − tol`.
    pub fn ge(&mut self, id: &str, instance: impl Into<String>, value: f64, bound: f64, tol: f64) {
        self.push(id, instance.into(), value, bound, value - bound + tol);
    }

    /// Records `|value − target| <= tol`.
    pub fn close(&mut self, id: &str, instance: impl Into<String>, value: f64, target: f64, tol: f64) {
        self.push(id, instance.into(), value, target, tol - (value - target).abs());
    }

    /// Records a boolean property.
    pub fn holds(&mut self, id: &str, instance: impl Into<String>, ok: bool) {
        let v = if ok { 1.0 } else { 0.0 };
        self.push(id, instance.into(), v, 1.0, v - 1.0);
    }

    pub fn rows(&self) -> &[CheckRow] {
        &self.rows
    }

    pub fn into_rows(self) -> Vec<CheckRow> {
        self.rows
    }
}

/// Per-invariant counts in registry order.
pub fn summarize(rows: &[CheckRow]) -> Vec<InvariantSummary> {
    let mut by_id: BTreeMap<&str, InvariantSummary> = BTreeMap::new();
    for r in rows {
        let s = by_id.entry(r.invariant.as_str()).or_insert_with(|| InvariantSummary {
            invariant: r.invariant.clone(),
            instances: 0,
            failures: 0,
            worst_slack: f64::INFINITY,
        });
        s.instances += 1;
        s.failures += usize::from(!r.passed);
        s.worst_slack = s.worst_slack.min(r.slack);
    }
    INVARIANTS
        .iter()
        .filter_map(|(id, _)| by_id.remove(id))
        .collect()
}

/// `rate − (D − margin)` per `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateGap {
    pub n: usize,
    pub rate: f64,
    pub target: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub stage: String,
    pub seconds: f64,
}

/// Wall-clock stopwatch for report stages.
#[derive(Debug, Default)]
pub struct Timings {
    entries: Vec<Timing>,
}

impl Timings {
    pub fn time<T>(&mut self, stage: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.entries.push(Timing {
            stage: stage.to_string(),
            seconds: start.elapsed().as_secs_f64(),
        });
        out
    }

    pub fn into_entries(self) -> Vec<Timing> {
        self.entries
    }
}

/// Outcome of a harness run. Timings are kept out of the serialized form so
/// that identical configurations give byte-identical reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema: String,
    pub command: String,
    pub config: ExperimentConfig,
    pub relative_entropy: Option<f64>,
    pub stein_runs: Vec<SteinRunRecord>,
    pub rate_gaps: Vec<RateGap>,
    pub convergence: Vec<ConvergenceRow>,
    pub cumulant: Vec<CumulantAudit>,
    pub invariants: Vec<InvariantSummary>,
    pub checks: Vec<CheckRow>,
    #[serde(skip)]
    pub timings: Vec<Timing>,
}

impl RunReport {
    pub fn new(command: &str, config: &ExperimentConfig) -> Self {
        Self {
            schema: "stein-lab report v1".into(),
            command: command.into(),
            config: config.clone(),
            relative_entropy: None,
            stein_runs: Vec::new(),
            rate_gaps: Vec::new(),
            convergence: Vec::new(),
            cumulant: Vec::new(),
            invariants: Vec::new(),
            checks: Vec::new(),
            timings: Vec::new(),
        }
    }

    pub fn set_checks(&mut self, checks: Checks) {
        self.checks = checks.into_rows();
        self.invariants = summarize(&self.checks);
    }

    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.passed).count()
    }

    pub fn passed(&self) -> bool {
        self.failures() == 0
    }

    /// Process exit status: 0 when every check passed, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Writes `report.json`, `timings.json` and one CSV per table into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("report.json"), self.to_json())?;
        let timings = serde_json::to_string_pretty(&self.timings).expect("timings serialize");
        std::fs::write(dir.join("timings.json"), timings)?;
        if !self.stein_runs.is_empty() {
            write_csv(&dir.join("stein_runs.csv"), &stein_run_table(&self.stein_runs))?;
        }
        if !self.convergence.is_empty() {
            write_csv(&dir.join("convergence.csv"), &convergence_table(&self.convergence))?;
        }
        if !self.cumulant.is_empty() {
            write_csv(&dir.join("cumulant.csv"), &cumulant_table(&self.cumulant))?;
        }
        write_csv(&dir.join("checks.csv"), &check_table(&self.checks))?;
        write_csv(&dir.join("invariants.csv"), &summary_table(&self.invariants))?;
        Ok(())
    }
}

/// Header plus rows, ready for CSV output.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// CSV text including the schema comment line.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
        w.write_record(&self.header).map_err(csv_err)?;
        for r in &self.rows {
            w.write_record(r).map_err(csv_err)?;
        }
        let body = w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
        Ok(format!(
            "{CSV_SCHEMA_HEADER}\n{}",
            String::from_utf8(body).expect("csv output is utf-8")
        ))
    }
}

pub fn write_csv(path: &Path, table: &Table) -> Result<()> {
    std::fs::write(path, table.to_csv()?)?;
    Ok(())
}

/// Shortest round-tripping representation, with `-0` printed as `0`.
pub fn num(x: f64) -> String {
    format!("{:?}", x + 0.0)
}

pub fn stein_run_table(runs: &[SteinRunRecord]) -> Table {
    let mut t = Table::new(&["n", "alpha", "beta", "rate", "threshold", "cell_count", "beta_bound_ok"]);
    for r in runs {
        t.push(vec![
            r.n.to_string(),
            num(r.alpha_n),
            num(r.beta_n),
            num(r.rate),
            num(r.threshold),
            r.cells.to_string(),
            r.beta_bound_ok.to_string(),
        ]);
    }
    t
}

pub fn convergence_table(rows: &[ConvergenceRow]) -> Table {
    let mut t = Table::new(&[
        "n",
        "deviation_probability",
        "dd_measured",
        "dd_dense",
        "dd_ok",
        "variance",
        "variance_bound",
        "variance_ok",
    ]);
    for r in rows {
        t.push(vec![
            r.n.to_string(),
            num(r.deviation_probability),
            num(r.dd_measured),
            r.dd_dense.map(num).unwrap_or_default(),
            r.dd_ok.to_string(),
            num(r.variance),
            num(r.variance_bound),
            r.variance_ok.to_string(),
        ]);
    }
    t
}

pub fn cumulant_table(rows: &[CumulantAudit]) -> Table {
    let mut t = Table::new(&[
        "n",
        "a",
        "lhs",
        "rhs",
        "rhs_alt",
        "bound_ok",
        "tail_probability",
        "markov_bound",
        "markov_ok",
    ]);
    for r in rows {
        t.push(vec![
            r.n.to_string(),
            num(r.a),
            num(r.lhs),
            num(r.rhs),
            num(r.rhs_alt),
            r.bound_ok.to_string(),
            num(r.tail_probability),
            num(r.markov_bound),
            r.markov_ok.to_string(),
        ]);
    }
    t
}

pub fn check_table(rows: &[CheckRow]) -> Table {
    let mut t = Table::new(&["invariant", "instance", "value", "bound", "slack", "passed"]);
    for r in rows {
        t.push(vec![
            r.invariant.clone(),
            r.instance.clone(),
            num(r.value),
            num(r.bound),
            num(r.slack),
            r.passed.to_string(),
        ]);
    }
    t
}

pub fn summary_table(rows: &[InvariantSummary]) -> Table {
    let mut t = Table::new(&["invariant", "instances", "failures", "worst_slack"]);
    for r in rows {
        t.push(vec![
            r.invariant.clone(),
            r.instances.to_string(),
            r.failures.to_string(),
            num(r.worst_slack),
        ]);
    }
    t
}
