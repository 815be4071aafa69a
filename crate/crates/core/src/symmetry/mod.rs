//! Schur–Weyl machinery: partitions, symmetric-group characters, the
//! isotypic decomposition of `(C^k)^{⊗n}`, the qubit total-spin
//! decomposition, and the joint measurement `E^n × E(sigma^{⊗n})`.

mod partition;
mod schur;
mod spin;
mod stein;

pub use partition::{partitions_of, sn_character, Partition};
pub use schur::{isotypic_pvm, SchurComponent, SchurDecomposition};
pub use spin::{qubit_spin_blocks, spin_partition, total_spin_casimir, total_spin_pvm, SpinBlock};
pub use stein::{
    stein_measurement, stein_measurement_with, stein_pvm, SectorMethod, SteinCell,
    SteinMeasurement,
};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opcore::{is_refinement, joint_pvm, spectral_pvm_default, tensor_power, DensityMatrix};
    use crate::random::{random_density, Substream};
    use crate::Limits;

    #[test]
    fn maximally_mixed_reduces_to_sectors() {
        let sigma = DensityMatrix::maximally_mixed(2);
        for n in 1..=5 {
            let m = stein_pvm(&sigma, n, &Limits::default()).unwrap();
            let e = total_spin_pvm(n, &Limits::default()).unwrap();
            assert_eq!(m.len(), e.len());
            assert!(is_refinement(&m, &e) && is_refinement(&e, &m));
        }
    }

    #[test]
    fn two_site_diagonal_example() {
        let sigma = DensityMatrix::diagonal(&[0.7, 0.3]).unwrap();
        let m = stein_measurement(&sigma, 2, &Limits::default()).unwrap();
        // three symmetric cells plus one antisymmetric cell
        assert_eq!(m.pvm.len(), 4);
        let mut evs: Vec<(usize, f64)> = m
            .cells
            .iter()
            .map(|c| match c.sector {
                crate::opcore::CellLabel::Spin { twice_j } => (twice_j, c.log_sigma_eigenvalue.exp()),
                _ => unreachable!(),
            })
            .collect();
        evs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let expected = [(0, 0.21), (2, 0.09), (2, 0.21), (2, 0.49)];
        assert_eq!(evs.len(), expected.len());
        for ((tj, ev), (etj, eev)) in evs.iter().zip(expected) {
            assert_eq!(*tj, etj);
            assert!((ev - eev).abs() < 1e-12);
        }
    }

    #[test]
    fn refines_both_factors_and_matches_generic_join() {
        let mut rng = Substream::new(61, "stein-refine").rng();
        let limits = Limits::default();
        for n in 1..=4 {
            let sigma = random_density(&mut rng, 2);
            let m = stein_pvm(&sigma, n, &limits).unwrap();
            assert!(m.projector_defect() < 1e-9);
            let e = total_spin_pvm(n, &limits).unwrap();
            let power = tensor_power(&sigma, n, &limits).unwrap();
            let spectral = spectral_pvm_default(power.op());
            assert!(is_refinement(&e, &m), "n = {n}");
            assert!(is_refinement(&spectral, &m), "n = {n}");
            let generic = joint_pvm(&e, &spectral).unwrap();
            assert!(is_refinement(&generic, &m) && is_refinement(&m, &generic));
        }
    }

    #[test]
    fn qutrit_path_uses_characters() {
        let mut rng = Substream::new(62, "stein-qutrit").rng();
        let sigma = random_density(&mut rng, 3);
        let m = stein_pvm(&sigma, 3, &Limits::default()).unwrap();
        assert!(m.projector_defect() < 1e-9);
        let power = tensor_power(&sigma, 3, &Limits::default()).unwrap();
        assert!(m.commutation_defect(power.matrix()).unwrap() < 1e-9);
        let sectors = isotypic_pvm(3, 3, &Limits::default()).unwrap().pvm().unwrap();
        assert!(is_refinement(&sectors, &m));
    }

    #[test]
    fn spin_and_character_paths_agree() {
        let mut rng = Substream::new(63, "stein-paths").rng();
        let sigma = random_density(&mut rng, 2);
        let limits = Limits::default();
        let a = stein_measurement_with(&sigma, 4, &limits, SectorMethod::Spin).unwrap();
        let b = stein_measurement_with(&sigma, 4, &limits, SectorMethod::Characters).unwrap();
        assert!(is_refinement(&a.pvm, &b.pvm) && is_refinement(&b.pvm, &a.pvm));
    }

    #[test]
    fn singular_sigma_is_rejected() {
        let sigma = DensityMatrix::diagonal(&[1.0, 0.0]).unwrap();
        assert!(stein_pvm(&sigma, 2, &Limits::default()).is_err());
    }
}
