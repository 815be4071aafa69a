//! Seeded random-instance sweeps covering every registered invariant.
//!
//! Each sweep draws from its own labelled substream of the root seed, so
//! adding or resizing a sweep never perturbs the others.

use rand::Rng;

use super::config::ExperimentConfig;
use super::experiment::{dominance_checks, record_convergence, record_runs};
use super::report::{Checks, RunReport, Timings};
use crate::opcore::{
    inverse_power_gap, is_refinement, log_variance_bound, measured_relative_entropy, pinch, pinched_log_variance,
    pinching_bound_margin, relative_entropy, spectral_pvm_default, tensor_power, DensityMatrix, Pvm,
};
use crate::random::{
    random_density, random_diagonal_density, random_hermitian, random_invertible, random_povm, random_probs,
    random_pvm, random_test, Substream,
};
use crate::spectrum::{
    finite_n_spectrum_bounds, iid_log_ratio_spectrum, kl_divergence, max_plog2, max_plog2_oracle,
    np_dominance_check, s_test, ClassicalTest, FiniteDistribution,
};
use crate::symmetry::{isotypic_pvm, partitions_of, sn_character, stein_measurement, total_spin_pvm};
use crate::testing::{
    beta_star, beta_star_for, chernoff_sup, classical_beta_star, cumulant_bound_audit, error_probabilities,
    np_curve, np_test, spectrum_convergence_audit, stein_rate_curve, ConvergenceOptions, CUMULANT_SLACK,
};
use crate::{CMatrix, Limits, Result};

/// Instance counts of the sweeps.
#[derive(Debug, Clone, Copy)]
pub struct SuiteSize {
    pub operator_instances: usize,
    pub variance_instances: usize,
    pub state_pairs: usize,
    pub random_tests: usize,
    pub challengers: usize,
}

impl Default for SuiteSize {
    fn default() -> Self {
        Self {
            operator_instances: 200,
            variance_instances: 50,
            state_pairs: 3,
            random_tests: 200,
            challengers: 200,
        }
    }
}

impl SuiteSize {
    /// A few instances per sweep, for smoke tests.
    pub fn small() -> Self {
        Self {
            operator_instances: 10,
            variance_instances: 4,
            state_pairs: 1,
            random_tests: 20,
            challengers: 20,
        }
    }
}

pub fn run_audit_suite(config: &ExperimentConfig) -> Result<RunReport> {
    run_audit_suite_sized(config, SuiteSize::default())
}

pub fn run_audit_suite_sized(config: &ExperimentConfig, size: SuiteSize) -> Result<RunReport> {
    config.validate()?;
    let limits = config.limits();
    // qubit sweeps go up to n_max; fail before any work if that cannot fit
    limits.check_power(2, config.n_max)?;
    let mut report = RunReport::new("audit-all", config);
    let mut checks = Checks::default();
    let mut timings = Timings::default();
    let seed = config.seed;

    timings.time("opcore", || opcore_sweeps(&mut checks, seed, size))?;
    timings.time("symmetry", || symmetry_sweeps(&mut checks, seed, config.n_max, &limits))?;
    timings.time("testing", || testing_sweeps(&mut checks, config, size, &limits))?;
    timings.time("spectrum", || spectrum_sweeps(&mut checks, config, size))?;

    report.set_checks(checks);
    report.timings = timings.into_entries();
    Ok(report)
}

/// The pinching, entropy and spectral-PVM sweeps on their own.
pub fn operator_audit(seed: u64, size: SuiteSize) -> Result<Checks> {
    let mut checks = Checks::default();
    opcore_sweeps(&mut checks, seed, size)?;
    Ok(checks)
}

fn random_sizes<R: Rng>(rng: &mut R, dim: usize) -> Vec<usize> {
    let mut sizes = Vec::new();
    let mut left = dim;
    while left > 0 {
        let s = rng.random_range(1..=left);
        sizes.push(s);
        left -= s;
    }
    sizes
}

fn opcore_sweeps(checks: &mut Checks, seed: u64, size: SuiteSize) -> Result<()> {
    let mut rng = Substream::new(seed, "suite-pinching").rng();
    for i in 0..size.operator_instances {
        let dim = 2 + i % 3;
        let rho = random_density(&mut rng, dim);
        let sizes = random_sizes(&mut rng, dim);
        let m = random_pvm(&mut rng, dim, &sizes);
        let inst = format!("dim={dim} #{i}");
        let once = pinch(&rho, &m)?;
        let twice = pinch(&once, &m)?;
        let diff = crate::numeric::max_abs(&(once.matrix() - twice.matrix()));
        checks.le("opcore.pinching_idempotent", &inst, diff, 0.0, 1e-10);
        checks.close("opcore.pinching_trace", &inst, once.op().trace(), 1.0, 1e-12);
        checks.ge("opcore.pinching_positive", &inst, once.min_eigenvalue(), 0.0, 1e-12);
        let margin = pinching_bound_margin(&rho, &m, dim as f64)?;
        checks.ge("opcore.lemma5", &inst, margin, 0.0, 1e-10);
    }

    let mut rng = Substream::new(seed, "suite-monotonicity").rng();
    for i in 0..size.operator_instances {
        let dim = 2 + i % 2;
        let rho = random_density(&mut rng, dim);
        let sigma = random_density(&mut rng, dim);
        let outcomes = rng.random_range(2..=4);
        let m = random_povm(&mut rng, dim, outcomes);
        let dm = measured_relative_entropy(&rho, &sigma, &m)?;
        let d = relative_entropy(&rho, &sigma)?;
        checks.le("opcore.monotonicity", format!("dim={dim} #{i}"), dm, d, 1e-9);
    }

    let mut rng = Substream::new(seed, "suite-additivity").rng();
    let limits = Limits::default();
    for n in 1..=5 {
        let rho = random_density(&mut rng, 2);
        let sigma = random_density(&mut rng, 2);
        let d = relative_entropy(&rho, &sigma)?;
        let dn = relative_entropy(&tensor_power(&rho, n, &limits)?, &tensor_power(&sigma, n, &limits)?)?;
        checks.close("opcore.additivity", format!("n={n}"), dn, n as f64 * d, n as f64 * 1e-9);
    }

    // commuting instances: rho block diagonal over a random E, M refining E
    let mut rng = Substream::new(seed, "suite-lemma3").rng();
    for i in 0..size.variance_instances {
        let (e, m, rho, w) = commuting_instance(&mut rng, 3 + i % 4)?;
        let inst = format!("dim={} w={w} #{i}", e.dim());
        let v = pinched_log_variance(&rho, &e, &m)?;
        checks.le("opcore.lemma3", &inst, v, log_variance_bound(w), 1e-9);
        let margin = pinching_bound_margin(&rho, &m, w as f64)?;
        checks.ge("opcore.lemma6_margin", &inst, margin, 0.0, 1e-10);
        if rho.min_eigenvalue() > 1e-6 {
            for t in [0.25, 0.5, 1.0] {
                let gap = inverse_power_gap(&rho, &m, w as f64, t)?;
                checks.le("opcore.lemma6_inverse_power", format!("{inst} t={t}"), gap, 0.0, 1e-8);
            }
        }
    }

    let mut rng = Substream::new(seed, "suite-spectral").rng();
    for i in 0..size.operator_instances {
        let dim = 2 + i % 4;
        let x = random_hermitian(&mut rng, dim);
        let p = spectral_pvm_default(&x);
        checks.le("opcore.spectral_pvm", format!("dim={dim} #{i}"), p.projector_defect(), 0.0, 1e-9);
    }
    Ok(())
}

/// A PVM `E` with `w(E) >= 3`, a state commuting with it, and a rank-one
/// refinement `M` of `E` along a random basis of each cell.
pub(crate) fn commuting_instance<R: Rng>(rng: &mut R, dim: usize) -> Result<(Pvm, Pvm, DensityMatrix, usize)> {
    let big = rng.random_range(3..=dim);
    let mut sizes = vec![big];
    sizes.extend(random_sizes(rng, dim - big));
    let e = random_pvm(rng, dim, &sizes);
    let weights = random_probs(rng, e.len());
    let mut mat = CMatrix::zeros(dim, dim);
    for (cell, w) in e.cells().iter().zip(&weights) {
        let r = cell.rank();
        let block = random_density(rng, r);
        let v = cell.basis();
        mat += v * block.matrix().scale(*w) * v.adjoint();
    }
    let rho = DensityMatrix::from_matrix(mat)?;
    let m = e.refine_by(|v| {
        let h = random_hermitian(rng, v.ncols());
        h.matrix().clone()
    });
    let w = e.width();
    Ok((e, m, rho, w))
}

fn symmetry_sweeps(checks: &mut Checks, seed: u64, n_max: usize, limits: &Limits) -> Result<()> {
    for n in 1..=n_max.min(6) {
        let classes = partitions_of(n, n);
        let order: i128 = (1..=n as i128).product();
        for (a, la) in classes.iter().enumerate() {
            for lb in &classes[a..] {
                let mut sum: i128 = 0;
                for mu in &classes {
                    let ca = sn_character(la, mu)? as i128;
                    let cb = sn_character(lb, mu)? as i128;
                    sum += mu.class_size() as i128 * ca * cb;
                }
                let expected = if la == lb { order } else { 0 };
                checks.holds(
                    "symmetry.character_orthogonality",
                    format!("n={n} {la} {lb}"),
                    sum == expected,
                );
            }
        }
    }

    let mut rng = Substream::new(seed, "suite-schur").rng();
    for n in 1..=n_max.min(6) {
        let dec = isotypic_pvm(n, 2, limits)?;
        let pvm = dec.pvm()?;
        checks.le("symmetry.isotypic_complete", format!("n={n}"), pvm.projector_defect(), 0.0, 1e-9);
        checks.holds("symmetry.dimension_count", format!("n={n} k=2"), dec.dimension_count() == dec.dim());
        checks.holds("symmetry.sl_dim_bound", format!("n={n} k=2"), dec.sl_dims_within_bound());
        let spin = total_spin_pvm(n, limits)?;
        checks.holds(
            "symmetry.spin_matches_characters",
            format!("n={n}"),
            is_refinement(&spin, &pvm) && is_refinement(&pvm, &spin),
        );
        for j in 0..3 {
            let rho = random_density(&mut rng, 2);
            let power = tensor_power(&rho, n, limits)?;
            let defect = pvm.commutation_defect(power.matrix())?;
            checks.le("symmetry.commutes_with_rho_power", format!("n={n} #{j}"), defect, 0.0, 1e-9);
            let g = random_invertible(&mut rng, 2);
            let mut gn = g.clone();
            for _ in 1..n {
                gn = gn.kronecker(&g);
            }
            let defect = pvm.commutation_defect(&gn)?;
            let scale = crate::numeric::max_abs(&gn).max(1.0);
            checks.le("symmetry.commutes_with_g_power", format!("n={n} #{j}"), defect / scale, 0.0, 1e-9);
        }
    }
    for n in 1..=n_max.min(4) {
        let dec = isotypic_pvm(n, 3, limits)?;
        checks.holds("symmetry.dimension_count", format!("n={n} k=3"), dec.dimension_count() == dec.dim());
        checks.holds("symmetry.sl_dim_bound", format!("n={n} k=3"), dec.sl_dims_within_bound());
    }

    let mut rng = Substream::new(seed, "suite-stein-pvm").rng();
    for n in 1..=n_max.min(5) {
        let sigma = random_density(&mut rng, 2);
        let m = stein_measurement(&sigma, n, limits)?;
        let e = total_spin_pvm(n, limits)?;
        let power = tensor_power(&sigma, n, limits)?;
        let spectral = spectral_pvm_default(power.op());
        checks.holds(
            "symmetry.stein_pvm_refines",
            format!("n={n}"),
            is_refinement(&e, &m.pvm) && is_refinement(&spectral, &m.pvm),
        );
        let defect = m.pvm.commutation_defect(power.matrix())?;
        checks.le("symmetry.stein_pvm_commutes_sigma", format!("n={n}"), defect, 0.0, 1e-9);
    }
    Ok(())
}

fn testing_sweeps(checks: &mut Checks, config: &ExperimentConfig, size: SuiteSize, limits: &Limits) -> Result<()> {
    let seed = config.seed;
    let mut rng = Substream::new(seed, "suite-np").rng();
    for i in 0..size.state_pairs {
        let rho = random_density(&mut rng, 2);
        let sigma = random_density(&mut rng, 2);
        for t in [0.5, 1.0, 2.0] {
            let best = error_probabilities(&np_test(&rho, &sigma, t, 0.0)?, &rho, &sigma)?;
            let own = best.alpha + t * best.beta;
            let mut worst = f64::INFINITY;
            for _ in 0..size.random_tests {
                let e = error_probabilities(&random_test(&mut rng, 2), &rho, &sigma)?;
                worst = worst.min(e.alpha + t * e.beta);
            }
            checks.le("testing.np_optimality", format!("pair {i} t={t}"), own, worst, 1e-12);
        }
        for n in 1..=4.min(config.n_max) {
            let rn = tensor_power(&rho, n, limits)?;
            let sn = tensor_power(&sigma, n, limits)?;
            let ts: Vec<f64> = (0..30).map(|j| 0.05 * 1.3f64.powi(j)).collect();
            let curve = np_curve(&rn, &sn, &ts)?;
            let mut worst: f64 = 0.0;
            for w in curve.windows(2) {
                worst = worst
                    .max(w[1].errors.beta - w[0].errors.beta)
                    .max(w[0].errors.alpha - w[1].errors.alpha);
            }
            checks.le("testing.np_monotone", format!("pair {i} n={n}"), worst, 0.0, 1e-10);
            for eps in [0.1, 0.3] {
                let b = beta_star_for(&rn, &sn, eps)?;
                checks.le("testing.beta_star_gap", format!("pair {i} n={n} eps={eps}"), b.certificate_gap.abs(), 0.0, 1e-8);
            }
        }
    }

    let mut rng = Substream::new(seed, "suite-np-classical").rng();
    for i in 0..size.state_pairs {
        let rho = random_diagonal_density(&mut rng, 2);
        let sigma = random_diagonal_density(&mut rng, 2);
        for n in 1..=3.min(config.n_max) {
            let p = diag_power(&rho, n, limits)?;
            let q = diag_power(&sigma, n, limits)?;
            for eps in [0.1, 0.3] {
                let b = beta_star(&rho, &sigma, n, eps, limits)?;
                let oracle = classical_beta_star(&p, &q, eps)?;
                checks.close("testing.beta_star_classical", format!("pair {i} n={n} eps={eps}"), b.beta, oracle, 1e-10);
            }
        }
    }

    let mut rng = Substream::new(seed, "suite-stein-run").rng();
    let n_range: Vec<usize> = (config.n_min..=config.n_max).collect();
    for i in 0..size.state_pairs {
        let rho = random_density(&mut rng, 2);
        let sigma = random_density(&mut rng, 2);
        let tag = format!("pair {i} ");
        let runs = stein_rate_curve(&rho, &sigma, config.epsilon_margin, &n_range, limits)?;
        record_runs(checks, &runs, &tag);
        dominance_checks(checks, &rho, &sigma, &runs, limits, &tag)?;
        let options = ConvergenceOptions {
            delta: config.delta,
            ..ConvergenceOptions::default()
        };
        for r in spectrum_convergence_audit(&rho, &sigma, &n_range, options, limits)? {
            record_convergence(checks, &r, &tag);
        }
        let cross = -rho.op().trace_product(&sigma.op().map_spectrum(f64::ln))?;
        for &n in &n_range {
            for shift in [-0.5, 0.2, 1.0] {
                let a = cross + (n as f64 + 1.0).ln() / n as f64 + shift;
                let c = cumulant_bound_audit(&rho, &sigma, a, n, limits)?;
                let inst = format!("{tag}n={n} a={a:.6}");
                checks.ge("testing.cumulant_bound", &inst, c.lhs, c.rhs, CUMULANT_SLACK);
                checks.le("testing.markov", &inst, c.tail_probability, c.markov_bound, 1e-12 * c.markov_bound);
                checks.ge("testing.chernoff_nonnegative", &inst, c.rhs, 0.0, 0.0);
            }
        }
        let c = chernoff_sup(&rho, &sigma, -1.0)?;
        checks.ge("testing.chernoff_nonnegative", format!("{tag}a=-1"), c.value, 0.0, 0.0);
    }
    Ok(())
}

/// Diagonal of `rho^{⊗n}` for a diagonal `rho`.
fn diag_power(rho: &DensityMatrix, n: usize, limits: &Limits) -> Result<Vec<f64>> {
    let p = tensor_power(rho, n, limits)?;
    Ok((0..p.dim()).map(|i| p.matrix()[(i, i)].re).collect())
}

fn spectrum_sweeps(checks: &mut Checks, config: &ExperimentConfig, size: SuiteSize) -> Result<()> {
    let seed = config.seed;
    let mut rng = Substream::new(seed, "suite-spectrum").rng();
    for i in 0..size.state_pairs.max(5) {
        let k = 2 + i % 3;
        let p = FiniteDistribution::from_probs(random_probs(&mut rng, k))?;
        let q = FiniteDistribution::from_probs(random_probs(&mut rng, k))?;
        let d = kl_divergence(&p, &q)?;
        for n in [1usize, 4, 16] {
            let spec = iid_log_ratio_spectrum(&p, &q, n)?;
            let inst = format!("pair {i} k={k} n={n}");
            checks.close("spectrum.mass_and_mean", format!("{inst} mass"), spec.total_p_mass(), 1.0, 1e-10);
            checks.close("spectrum.mass_and_mean", format!("{inst} mean"), spec.mean(), d, 1e-10);
            for lambda in [-0.5, 0.0, 0.5 * d, d, 2.0 * d] {
                let s = s_test(&p, &q, n, lambda)?;
                checks.le("spectrum.s_test_bound", format!("{inst} lambda={lambda:.6}"), s.errors.beta, s.beta_bound, 0.0);
            }
        }
        let (lo16, hi16) = finite_n_spectrum_bounds(&p, &q, 16, config.eta)?;
        let (lo64, hi64) = finite_n_spectrum_bounds(&p, &q, 64, config.eta)?;
        checks.le("spectrum.bounds_shrink", format!("pair {i} k={k}"), hi64 - lo64, hi16 - lo16, 0.0);
    }

    let mut rng = Substream::new(seed, "suite-np-dominance").rng();
    let p = FiniteDistribution::from_probs(random_probs(&mut rng, 3))?;
    let q = FiniteDistribution::from_probs(random_probs(&mut rng, 3))?;
    let n = 3;
    let labels = p.power(n).labels().to_vec();
    for j in 0..size.challengers {
        let accept: Vec<f64> = labels.iter().map(|_| rng.random::<f64>()).collect();
        let challenger = ClassicalTest::new(labels.clone(), accept)?;
        let c = np_dominance_check(&p, &q, n, 0.1, &challenger)?;
        checks.le(
            "spectrum.np_dominance",
            format!("challenger {j}"),
            c.threshold_cost,
            c.challenger_cost,
            1e-10,
        );
    }

    for k in 2..=6 {
        let closed = max_plog2(k)?;
        let oracle = max_plog2_oracle(k, 100_000)?;
        checks.close("spectrum.lemma4", format!("k={k}"), closed, oracle, 1e-6);
    }
    Ok(())
}
