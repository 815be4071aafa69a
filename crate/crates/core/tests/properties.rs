//! Property tests over randomly seeded instances.

use proptest::prelude::*;
use stein_lab::opcore::{measured_relative_entropy, pinch, relative_entropy, DensityMatrix};
use stein_lab::random::{random_density, random_povm, random_probs, random_pvm, Substream};
use stein_lab::spectrum::max_plog2;
use stein_lab::testing::{beta_star, classical_beta_star};
use stein_lab::Limits;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn relative_entropy_is_nonnegative_and_dominates_measurements(seed in any::<u64>(), dim in 2usize..4, outcomes in 2usize..5) {
        let mut rng = Substream::new(seed, "prop-relent").rng();
        let rho = random_density(&mut rng, dim);
        let sigma = random_density(&mut rng, dim);
        let d = relative_entropy(&rho, &sigma).unwrap();
        let m = random_povm(&mut rng, dim, outcomes);
        let dm = measured_relative_entropy(&rho, &sigma, &m).unwrap();
        prop_assert!(d >= -1e-12);
        prop_assert!(dm >= -1e-12 && dm <= d + 1e-9);
    }

    #[test]
    fn pinching_preserves_trace(seed in any::<u64>(), dim in 2usize..5) {
        let mut rng = Substream::new(seed, "prop-pinch").rng();
        let rho = random_density(&mut rng, dim);
        let m = random_pvm(&mut rng, dim, &vec![1; dim]);
        let pinched = pinch(&rho, &m).unwrap();
        prop_assert!((pinched.matrix().trace().re - 1.0).abs() < 1e-12);
        prop_assert!(pinched.min_eigenvalue() >= -1e-12);
    }

    #[test]
    fn plog2_never_exceeds_its_maximum(seed in any::<u64>(), k in 2usize..7) {
        let mut rng = Substream::new(seed, "prop-plog2").rng();
        let p = random_probs(&mut rng, k);
        let s: f64 = p.iter().filter(|&&x| x > 0.0).map(|&x| x * x.ln().powi(2)).sum();
        prop_assert!(s <= max_plog2(k).unwrap() + 1e-12);
    }

    #[test]
    fn diagonal_beta_star_matches_classical(seed in any::<u64>(), eps in 0.05f64..0.95) {
        let mut rng = Substream::new(seed, "prop-np").rng();
        let p = random_probs(&mut rng, 3);
        let q: Vec<f64> = random_probs(&mut rng, 3).iter().map(|x| 0.9 * x + 0.1 / 3.0).collect();
        let rho = DensityMatrix::diagonal(&p).unwrap();
        let sigma = DensityMatrix::diagonal(&q).unwrap();
        let quantum = beta_star(&rho, &sigma, 1, eps, &Limits::default()).unwrap().beta;
        prop_assert!((quantum - classical_beta_star(&p, &q, eps).unwrap()).abs() < 1e-10);
    }
}
