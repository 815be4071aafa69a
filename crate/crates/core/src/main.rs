use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use stein_lab::harness::{
    self, check_table, cumulant_table, num, operator_audit, run_audit_suite, run_stein_experiment, stein_run_table,
    summarize, summary_table, write_csv, ExperimentConfig, RunReport, SuiteSize, Table,
};
use stein_lab::opcore::{relative_entropy, tensor_power};
use stein_lab::spectrum::{iid_log_ratio_spectrum, max_plog2, max_plog2_oracle, FiniteDistribution};
use stein_lab::symmetry::isotypic_pvm;
use stein_lab::testing::{beta_star, cumulant_bound_audit, np_curve};
use stein_lab::{Error, Result};

#[derive(Parser)]
#[command(name = "stein-lab", version, about = "Desk-scale quantum hypothesis testing laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Quantum relative entropy D(rho||sigma)
    Relent(Common),
    /// Optimal type-II error beta*_n(epsilon) with its duality gap
    BetaStar(Common),
    /// Measured likelihood-ratio test with threshold D - margin, plus audits
    SteinRun(Common),
    /// Neyman-Pearson trade-off curve at a fixed n
    NpCurve {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 0.01)]
        t_min: f64,
        #[arg(long, default_value_t = 100.0)]
        t_max: f64,
        #[arg(long, default_value_t = 50)]
        points: usize,
    },
    /// Markov/cumulant bound audit
    CumulantAudit {
        #[command(flatten)]
        common: Common,
        /// Level a; defaults to -Tr rho log sigma + (k-1)log(n+1)/n + margin
        #[arg(long, allow_hyphen_values = true)]
        a: Option<f64>,
    },
    /// Isotypic decomposition table
    Schur {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 2)]
        k: usize,
    },
    /// Seeded sweeps of the pinching inequalities
    PinchAudit(Common),
    /// Classical log-likelihood spectrum of p^n against q^n
    Spectrum {
        #[command(flatten)]
        common: Common,
        /// Comma-separated probabilities
        #[arg(long, value_delimiter = ',', required = true)]
        p: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        q: Vec<f64>,
    },
    /// max sum p (log p)^2 against the KKT/grid oracle
    Lemma4 {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 6)]
        k_max: usize,
        #[arg(long, default_value_t = 1_000_000)]
        grid: usize,
    },
    /// Every registered invariant on seeded random instances
    AuditAll(Common),
}

#[derive(Clone, Copy, ValueEnum, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON experiment configuration
    #[arg(long)]
    config: Option<PathBuf>,
    /// Matrix file for rho (overrides the config)
    #[arg(long)]
    rho: Option<PathBuf>,
    /// Matrix file for sigma (overrides the config)
    #[arg(long)]
    sigma: Option<PathBuf>,
    #[arg(long)]
    n_min: Option<usize>,
    #[arg(long)]
    n_max: Option<usize>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    epsilon_margin: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    dim_budget: Option<usize>,
    /// Directory for CSV and JSON outputs
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

impl Common {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(path) => ExperimentConfig::from_file(path)?,
            None => ExperimentConfig::default(),
        };
        let path_source = |p: &Path| {
            let abs = std::fs::canonicalize(p).unwrap_or_else(|_| p.to_path_buf());
            harness::MatrixSource::Path(abs.display().to_string())
        };
        if let Some(p) = &self.rho {
            c.rho = Some(path_source(p));
        }
        if let Some(p) = &self.sigma {
            c.sigma = Some(path_source(p));
        }
        macro_rules! set {
            ($($f:ident),*) => { $( if let Some(v) = self.$f { c.$f = v; } )* };
        }
        set!(n_min, n_max, epsilon, epsilon_margin, eta, seed);
        if self.dim_budget.is_some() {
            c.dim_budget = self.dim_budget;
        }
        c.apply_env_budget()?;
        c.validate()?;
        Ok(c)
    }

    fn emit_table(&self, name: &str, table: &Table) -> Result<()> {
        if let Some(dir) = &self.out_dir {
            std::fs::create_dir_all(dir)?;
            write_csv(&dir.join(format!("{name}.csv")), table)?;
        }
        match self.format {
            Format::Csv => print!("{}", table.to_csv()?),
            Format::Json => {
                let rows: Vec<serde_json::Map<String, serde_json::Value>> = table
                    .rows
                    .iter()
                    .map(|r| {
                        table
                            .header
                            .iter()
                            .cloned()
                            .zip(r.iter().map(|v| serde_json::Value::String(v.clone())))
                            .collect()
                    })
                    .collect();
                println!("{}", serde_json::to_string_pretty(&rows).expect("rows serialize"));
            }
        }
        Ok(())
    }

    fn emit_report(&self, report: &RunReport, primary: &Table) -> Result<i32> {
        if let Some(dir) = &self.out_dir {
            report.write_to(dir)?;
        }
        match self.format {
            Format::Csv => print!("{}", primary.to_csv()?),
            Format::Json => println!("{}", report.to_json()),
        }
        for s in report.invariants.iter().filter(|s| s.failures > 0) {
            eprintln!("invariant {} failed on {}/{} instances", s.invariant, s.failures, s.instances);
        }
        Ok(report.exit_code())
    }
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Relent(common) => {
            let c = common.config()?;
            let (rho, sigma) = c.states()?;
            let mut t = Table::new(&["dim", "relative_entropy"]);
            t.push(vec![rho.dim().to_string(), num(relative_entropy(&rho, &sigma)?)]);
            common.emit_table("relent", &t)?;
            Ok(0)
        }
        Command::BetaStar(common) => {
            let c = common.config()?;
            let (rho, sigma) = c.states()?;
            let limits = c.limits();
            let mut t = Table::new(&["n", "epsilon", "beta_star", "certificate_gap", "t", "gap_ok"]);
            let mut ok = true;
            for n in c.n_range() {
                let b = beta_star(&rho, &sigma, n, c.epsilon, &limits)?;
                let gap_ok = b.certificate_gap.abs() <= 1e-8;
                ok &= gap_ok;
                t.push(vec![
                    n.to_string(),
                    num(c.epsilon),
                    num(b.beta),
                    num(b.certificate_gap),
                    num(b.t),
                    gap_ok.to_string(),
                ]);
            }
            common.emit_table("beta_star", &t)?;
            Ok(if ok { 0 } else { harness::EXIT_INVARIANT })
        }
        Command::SteinRun(common) => {
            let c = common.config()?;
            let report = run_stein_experiment(&c)?;
            common.emit_report(&report, &stein_run_table(&report.stein_runs))
        }
        Command::NpCurve {
            common,
            n,
            t_min,
            t_max,
            points,
        } => {
            let c = common.config()?;
            if !(t_min > 0.0 && t_max > t_min && points >= 2) {
                return Err(Error::InvalidArgument("need 0 < t-min < t-max and points >= 2".into()));
            }
            let (rho, sigma) = c.states()?;
            let limits = c.limits();
            let rn = tensor_power(&rho, n, &limits)?;
            let sn = tensor_power(&sigma, n, &limits)?;
            let ratio = (t_max / t_min).powf(1.0 / (points - 1) as f64);
            let ts: Vec<f64> = (0..points).map(|i| t_min * ratio.powi(i as i32)).collect();
            let mut t = Table::new(&["n", "t", "alpha", "beta"]);
            for p in np_curve(&rn, &sn, &ts)? {
                t.push(vec![n.to_string(), num(p.t), num(p.errors.alpha), num(p.errors.beta)]);
            }
            common.emit_table("np_curve", &t)?;
            Ok(0)
        }
        Command::CumulantAudit { common, a } => {
            let c = common.config()?;
            let (rho, sigma) = c.states()?;
            let limits = c.limits();
            let cross = -rho.op().trace_product(&sigma.op().map_spectrum(f64::ln))?;
            let k = sigma.dim() as f64;
            let mut rows = Vec::new();
            for n in c.n_range() {
                let level =
                    a.unwrap_or(cross + (k - 1.0) * ((n + 1) as f64).ln() / n as f64 + c.epsilon_margin);
                rows.push(cumulant_bound_audit(&rho, &sigma, level, n, &limits)?);
            }
            common.emit_table("cumulant", &cumulant_table(&rows))?;
            let ok = rows.iter().all(|r| r.bound_ok && r.markov_ok);
            Ok(if ok { 0 } else { harness::EXIT_INVARIANT })
        }
        Command::Schur { common, k } => {
            let c = common.config()?;
            let limits = c.limits();
            let mut t = Table::new(&["n", "k", "partition", "d_lambda", "sl_dim", "rank", "w_bound_ok"]);
            let mut ok = true;
            for n in c.n_range() {
                let dec = isotypic_pvm(n, k, &limits)?;
                let bound = (n as u128 + 1).pow(k as u32 - 1);
                for comp in &dec.components {
                    let within = comp.sl_dim as u128 <= bound;
                    ok &= within;
                    t.push(vec![
                        n.to_string(),
                        k.to_string(),
                        comp.partition.to_string(),
                        comp.sn_dim.to_string(),
                        comp.sl_dim.to_string(),
                        comp.rank().to_string(),
                        within.to_string(),
                    ]);
                }
            }
            common.emit_table("schur", &t)?;
            Ok(if ok { 0 } else { harness::EXIT_INVARIANT })
        }
        Command::PinchAudit(common) => {
            let c = common.config()?;
            let checks = operator_audit(c.seed, SuiteSize::default())?;
            let rows = checks.rows();
            let summary = summarize(rows);
            if let Some(dir) = &common.out_dir {
                std::fs::create_dir_all(dir)?;
                write_csv(&dir.join("pinch_checks.csv"), &check_table(rows))?;
            }
            common.emit_table("pinch_audit", &summary_table(&summary))?;
            Ok(if rows.iter().all(|r| r.passed) { 0 } else { harness::EXIT_INVARIANT })
        }
        Command::Spectrum { common, p, q } => {
            let c = common.config()?;
            let p = FiniteDistribution::from_probs(p)?;
            let q = FiniteDistribution::from_probs(q)?;
            let mut t = Table::new(&["n", "lambda", "p_mass_below", "q_mass_at_or_above", "beta_bound"]);
            let mut ok = true;
            for n in c.n_range() {
                let spec = iid_log_ratio_spectrum(&p, &q, n)?;
                for pt in spec.points() {
                    let beta = spec.q_mass_at_or_above(pt.lambda);
                    let bound = (-(n as f64) * pt.lambda).exp();
                    ok &= beta <= bound;
                    t.push(vec![
                        n.to_string(),
                        num(pt.lambda),
                        num(spec.p_mass_below(pt.lambda)),
                        num(beta),
                        num(bound),
                    ]);
                }
            }
            common.emit_table("spectrum", &t)?;
            Ok(if ok { 0 } else { harness::EXIT_INVARIANT })
        }
        Command::Lemma4 { common, k_max, grid } => {
            let mut t = Table::new(&["k", "closed_form", "oracle", "difference", "log_k_squared", "ok"]);
            let mut ok = true;
            for k in 2..=k_max {
                let closed = max_plog2(k)?;
                let oracle = max_plog2_oracle(k, grid)?;
                let within = (closed - oracle).abs() <= 1e-6;
                ok &= within;
                t.push(vec![
                    k.to_string(),
                    num(closed),
                    num(oracle),
                    num(closed - oracle),
                    num((k as f64).ln().powi(2)),
                    within.to_string(),
                ]);
            }
            common.emit_table("lemma4", &t)?;
            Ok(if ok { 0 } else { harness::EXIT_INVARIANT })
        }
        Command::AuditAll(common) => {
            let c = common.config()?;
            let report = run_audit_suite(&c)?;
            common.emit_report(&report, &summary_table(&report.invariants))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(harness::EXIT_USAGE as u8)
        }
    }
}
