use super::measurement::Povm;
use super::operator::DensityMatrix;
use crate::numeric;
use crate::spectrum::kl_divergence;
use crate::Result;

/// Eigenvalues of `sigma` at or below this bound its kernel.
const KERNEL_THRESHOLD: f64 = 1e-14;

/// Mass of `rho` on the kernel of `sigma` above which supports are
/// considered incompatible.
const LEAK_THRESHOLD: f64 = 1e-12;

/// `D(rho || sigma) = Tr rho (log rho − log sigma)` in nats.
///
/// Returns `+∞` when the support of `rho` is not contained in that of `sigma`.
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    rho.op().check_dim(sigma.dim())?;
    let neg_entropy: f64 = rho.op().eigenvalues().into_iter().map(numeric::xlogx).sum();
    let s = sigma.op().eigh();
    let mut cross = 0.0;
    for (j, &mu) in s.values.iter().enumerate() {
        let v = s.vectors.column(j);
        let weight = (v.adjoint() * rho.matrix() * v)[(0, 0)].re;
        if mu <= KERNEL_THRESHOLD {
            if weight > LEAK_THRESHOLD {
                return Ok(f64::INFINITY);
            }
            continue;
        }
        cross += weight * mu.ln();
    }
    Ok((neg_entropy - cross).max(0.0))
}

/// `D^M(rho || sigma)`: KL divergence of the two outcome distributions.
pub fn measured_relative_entropy(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    m: &Povm,
) -> Result<f64> {
    let p = m.distribution(rho)?;
    let q = m.distribution(sigma)?;
    kl_divergence(&p, &q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opcore::{tensor_power, Pvm};
    use crate::random::{random_density, random_povm, Substream};
    use crate::{Error, Limits};

    #[test]
    fn self_divergence_is_zero() {
        let mut rng = Substream::new(31, "relent-self").rng();
        let rho = random_density(&mut rng, 3);
        assert!(relative_entropy(&rho, &rho).unwrap().abs() < 1e-12);
    }

    #[test]
    fn pure_against_mixed() {
        let rho = DensityMatrix::diagonal(&[1.0, 0.0]).unwrap();
        let sigma = DensityMatrix::maximally_mixed(2);
        let d = relative_entropy(&rho, &sigma).unwrap();
        assert!((d - 2f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn support_violation_is_infinite() {
        let rho = DensityMatrix::maximally_mixed(2);
        let sigma = DensityMatrix::diagonal(&[1.0, 0.0]).unwrap();
        assert_eq!(relative_entropy(&rho, &sigma).unwrap(), f64::INFINITY);
    }

    #[test]
    fn dimension_mismatch() {
        let err = relative_entropy(&DensityMatrix::maximally_mixed(2), &DensityMatrix::maximally_mixed(3));
        assert!(matches!(err, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn additivity_under_tensor_powers() {
        let mut rng = Substream::new(32, "relent-add").rng();
        let limits = Limits::default();
        for _ in 0..5 {
            let rho = random_density(&mut rng, 2);
            let sigma = random_density(&mut rng, 2);
            let d = relative_entropy(&rho, &sigma).unwrap();
            for n in 1..=5 {
                let dn = relative_entropy(
                    &tensor_power(&rho, n, &limits).unwrap(),
                    &tensor_power(&sigma, n, &limits).unwrap(),
                )
                .unwrap();
                assert!((dn - n as f64 * d).abs() <= n as f64 * 1e-9, "n = {n}");
            }
        }
    }

    #[test]
    fn measured_equals_quantum_on_common_eigenbasis() {
        let rho = DensityMatrix::diagonal(&[0.7, 0.2, 0.1]).unwrap();
        let sigma = DensityMatrix::diagonal(&[0.2, 0.3, 0.5]).unwrap();
        let m = Pvm::computational(3).to_povm();
        let dm = measured_relative_entropy(&rho, &sigma, &m).unwrap();
        let d = relative_entropy(&rho, &sigma).unwrap();
        assert!((dm - d).abs() < 1e-14);
        assert!(measured_relative_entropy(&rho, &rho, &m).unwrap().abs() < 1e-15);
    }

    #[test]
    fn measurement_never_increases_divergence() {
        let mut rng = Substream::new(33, "relent-mono").rng();
        for i in 0..200 {
            let dim = 2 + i % 2;
            let rho = random_density(&mut rng, dim);
            let sigma = random_density(&mut rng, dim);
            let m = random_povm(&mut rng, dim, 2 + i % 4);
            let dm = measured_relative_entropy(&rho, &sigma, &m).unwrap();
            let d = relative_entropy(&rho, &sigma).unwrap();
            assert!(dm <= d + 1e-9);
        }
    }
}
