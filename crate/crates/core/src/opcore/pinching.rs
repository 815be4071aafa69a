//! The pinching map `rho ↦ Σ_i E_i rho E_i` and the inequalities it satisfies.

use super::measurement::{refinement_map, Povm, Pvm};
use super::operator::{DensityMatrix, HermitianOperator};
use crate::numeric;
use crate::{CMatrix, Error, Result};

/// Eigenvalues at or below this are treated as the kernel when taking logs.
const LOG_SUPPORT_THRESHOLD: f64 = 1e-14;

/// Largest `[rho, E_i]` defect tolerated by the commutation preconditions.
const COMMUTATION_TOL: f64 = 1e-8;

/// `Σ_i E_i rho E_i`.
pub fn pinch(rho: &DensityMatrix, m: &Pvm) -> Result<DensityMatrix> {
    Ok(DensityMatrix::from_trusted(pinch_operator(rho.op(), m)?))
}

/// Pinching by a POVM; only projective POVMs are accepted.
pub fn pinch_povm(rho: &DensityMatrix, m: &Povm) -> Result<DensityMatrix> {
    pinch(rho, &m.to_pvm()?)
}

pub(crate) fn pinch_operator(x: &HermitianOperator, m: &Pvm) -> Result<HermitianOperator> {
    x.check_dim(m.dim())?;
    let mut out = CMatrix::zeros(m.dim(), m.dim());
    for cell in m.cells() {
        let v = cell.basis();
        let block = v.adjoint() * x.matrix() * v;
        out += v * block * v.adjoint();
    }
    Ok(HermitianOperator::from_matrix_unchecked(out))
}

/// Smallest eigenvalue of `c·E_M(rho) − rho`.
///
/// Non-negative for `c = dim` for any PVM, and for `c = w(E)` whenever
/// `rho` commutes with some `E <= M`.
pub fn pinching_bound_margin(rho: &DensityMatrix, m: &Pvm, c: f64) -> Result<f64> {
    if !(c >= 1.0) {
        return Err(Error::InvalidArgument(format!("scale c = {c} must be >= 1")));
    }
    let pinched = pinch_operator(rho.op(), m)?;
    Ok(pinched.scale(c).sub(rho.op())?.min_eigenvalue())
}

/// Largest eigenvalue of `E_M(rho)^{-t} − w^t rho^{-t}` for full-rank `rho`.
///
/// Operator monotonicity of `x ↦ −x^{-t}` on `0 < t <= 1` turns
/// `rho <= w E_M(rho)` into the statement that this is `<= 0`.
pub fn inverse_power_gap(rho: &DensityMatrix, m: &Pvm, w: f64, t: f64) -> Result<f64> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::InvalidArgument(format!("exponent t = {t} outside (0, 1]")));
    }
    rho.require_full_rank()?;
    let pinched = pinch_operator(rho.op(), m)?;
    let lhs = pinched.map_spectrum(|x| x.powf(-t));
    let rhs = rho.op().map_spectrum(|x| x.powf(-t)).scale(w.powf(t));
    Ok(lhs.sub(&rhs)?.max_eigenvalue())
}

/// `Tr rho (log rho − log E_M(rho))^2`.
///
/// Preconditions: `rho` commutes with every cell of `E`, `M` refines `E`,
/// and `w(E) >= 3`. Logarithms are taken on supports with `0 log 0 = 0`;
/// a pinched state whose kernel meets the support of `rho` is rejected.
pub fn pinched_log_variance(rho: &DensityMatrix, e: &Pvm, m: &Pvm) -> Result<f64> {
    if e.width() < 3 {
        return Err(Error::Precondition(format!(
            "w(E) = {} but the variance bound needs w(E) >= 3",
            e.width()
        )));
    }
    let defect = e.commutation_defect(rho.matrix())?;
    if defect > COMMUTATION_TOL {
        return Err(Error::Precondition(format!(
            "rho does not commute with E (defect {defect:e})"
        )));
    }
    if refinement_map(e, m)?.is_none() {
        return Err(Error::Precondition("M does not refine E".into()));
    }
    pinched_log_variance_unchecked(rho, m)
}

/// `Tr rho (log rho − log E_M(rho))^2` without the structural preconditions.
pub fn pinched_log_variance_unchecked(rho: &DensityMatrix, m: &Pvm) -> Result<f64> {
    let pinched = pinch_operator(rho.op(), m)?;
    let ps = pinched.eigh();
    let kernel: Vec<usize> = (0..ps.values.len())
        .filter(|&i| ps.values[i] <= LOG_SUPPORT_THRESHOLD)
        .collect();
    let kernel_basis = ps.vectors.select_columns(&kernel);
    let leaked = numeric::column_overlap_sum(&kernel_basis, &(rho.matrix() * &kernel_basis));
    if leaked > 1e-12 {
        return Err(Error::Precondition(format!(
            "pinched state vanishes on the support of rho (mass {leaked:e})"
        )));
    }
    let log_support = |x: f64| if x > LOG_SUPPORT_THRESHOLD { x.ln() } else { 0.0 };
    let diff = rho
        .op()
        .map_spectrum(log_support)
        .sub(&ps.apply(log_support))?;
    let sq = diff.matrix() * diff.matrix();
    Ok(numeric::trace_product(rho.matrix(), &sq))
}

/// The variance bound `4 (log w)^2`.
pub fn log_variance_bound(w: usize) -> f64 {
    4.0 * (w as f64).ln().powi(2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opcore::measurement::{spectral_pvm_default, CellLabel};
    use crate::random::{random_density, random_pvm, Substream};
    use crate::Complex64;

    fn plus() -> DensityMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        DensityMatrix::pure(&[Complex64::new(s, 0.0), Complex64::new(s, 0.0)]).unwrap()
    }

    fn x_basis() -> Pvm {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let u = CMatrix::from_row_slice(
            2,
            2,
            &[s, s, s, -s].map(|x| Complex64::new(x, 0.0)),
        );
        Pvm::from_unitary(&u, &[1, 1]).unwrap()
    }

    #[test]
    fn trivial_pinching_is_identity() {
        let rho = plus();
        let out = pinch(&rho, &Pvm::trivial(2)).unwrap();
        assert!(crate::numeric::max_abs(&(out.matrix() - rho.matrix())) < 1e-15);
    }

    #[test]
    fn eigenbasis_pinching_is_identity() {
        let mut rng = Substream::new(21, "pinch-eig").rng();
        let rho = random_density(&mut rng, 3);
        let out = pinch(&rho, &spectral_pvm_default(rho.op())).unwrap();
        assert!(crate::numeric::max_abs(&(out.matrix() - rho.matrix())) < 1e-12);
    }

    #[test]
    fn computational_pinching_erases_coherences() {
        let out = pinch(&plus(), &Pvm::computational(2)).unwrap();
        let expected = DensityMatrix::maximally_mixed(2);
        assert!(crate::numeric::max_abs(&(out.matrix() - expected.matrix())) < 1e-15);
    }

    #[test]
    fn pinching_is_idempotent_and_trace_preserving() {
        let mut rng = Substream::new(22, "pinch-idem").rng();
        for _ in 0..100 {
            let rho = random_density(&mut rng, 4);
            let m = random_pvm(&mut rng, 4, &[2, 1, 1]);
            let once = pinch(&rho, &m).unwrap();
            let twice = pinch(&once, &m).unwrap();
            assert!(crate::numeric::max_abs(&(once.matrix() - twice.matrix())) < 1e-10);
            assert!((once.op().trace() - 1.0).abs() < 1e-12);
            assert!(once.min_eigenvalue() > -1e-12);
        }
    }

    #[test]
    fn non_projective_povm_cannot_pinch() {
        let povm = Povm::new(vec![
            (CellLabel::index(0), HermitianOperator::diagonal(&[0.5, 0.5])),
            (CellLabel::index(1), HermitianOperator::diagonal(&[0.5, 0.5])),
        ])
        .unwrap();
        assert!(matches!(
            pinch_povm(&plus(), &povm),
            Err(Error::NotProjective { .. })
        ));
    }

    #[test]
    fn margin_boundary_case() {
        let zero = DensityMatrix::diagonal(&[1.0, 0.0]).unwrap();
        let margin = pinching_bound_margin(&zero, &x_basis(), 2.0).unwrap();
        assert!(margin.abs() < 1e-14);
    }

    #[test]
    fn margin_random_qubits() {
        let mut rng = Substream::new(23, "pinch-margin").rng();
        for _ in 0..1000 {
            let rho = random_density(&mut rng, 2);
            let m = random_pvm(&mut rng, 2, &[1, 1]);
            assert!(pinching_bound_margin(&rho, &m, 2.0).unwrap() >= -1e-10);
        }
    }

    #[test]
    fn variance_vanishes_when_commuting() {
        let rho = DensityMatrix::diagonal(&[0.5, 0.3, 0.2]).unwrap();
        let e = Pvm::trivial(3);
        let m = Pvm::computational(3);
        assert!(pinched_log_variance(&rho, &e, &m).unwrap().abs() < 1e-14);
    }

    #[test]
    fn variance_preconditions() {
        let rho = DensityMatrix::diagonal(&[0.6, 0.4]).unwrap();
        assert!(matches!(
            pinched_log_variance(&rho, &Pvm::trivial(2), &Pvm::computational(2)),
            Err(Error::Precondition(_))
        ));
        let mut rng = Substream::new(24, "pinch-pre").rng();
        let rho = random_density(&mut rng, 3);
        let e = Pvm::trivial(3);
        // computational PVM refines the trivial one, so only commutation fails
        // when E is not trivial
        let block = random_pvm(&mut rng, 3, &[3]);
        assert!(pinched_log_variance(&rho, &block, &Pvm::computational(3)).is_ok());
        let e2 = Pvm::computational(3);
        assert!(matches!(
            pinched_log_variance(&rho, &e2, &e),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn variance_bound_on_random_qutrits() {
        let mut rng = Substream::new(25, "pinch-var").rng();
        let bound = log_variance_bound(3);
        for _ in 0..200 {
            let rho = random_density(&mut rng, 3);
            let m = random_pvm(&mut rng, 3, &[1, 1, 1]);
            let v = pinched_log_variance(&rho, &Pvm::trivial(3), &m).unwrap();
            assert!(v <= bound + 1e-9, "{v} > {bound}");
        }
    }

    #[test]
    fn inverse_power_gap_commuting_instances() {
        let mut rng = Substream::new(26, "pinch-inv").rng();
        for _ in 0..100 {
            // rho block-diagonal for E = {span(e0,e1), span(e2)}; M refines E
            let block = random_density(&mut rng, 2);
            let mut m = CMatrix::zeros(3, 3);
            m.view_mut((0, 0), (2, 2)).copy_from(&(block.matrix() * Complex64::new(0.7, 0.0)));
            m[(2, 2)] = Complex64::new(0.3, 0.0);
            let rho = DensityMatrix::from_matrix(m).unwrap();
            let fine = Pvm::computational(3);
            for t in [0.25, 0.5, 1.0] {
                let gap = inverse_power_gap(&rho, &fine, 2.0, t).unwrap();
                assert!(gap <= 1e-8, "gap {gap} at t = {t}");
            }
        }
    }
}
