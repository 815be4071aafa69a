//! Operator-algebra core: Hermitian operators, states, tests, tensor powers,
//! measurements, pinching and relative entropies.

mod entropy;
pub mod exchange;
mod measurement;
mod operator;
mod pinching;
mod tensor;

pub use entropy::{measured_relative_entropy, relative_entropy};
pub use measurement::{
    is_refinement, joint_pvm, joint_pvm_with, measured_distribution, refinement_map,
    refinement_map_with, spectral_pvm, spectral_pvm_default, CellLabel, Povm, Pvm, PvmCell,
};
pub use operator::{DensityMatrix, HermitianOperator, Spectral, TestOperator, FULL_RANK_THRESHOLD};
pub use pinching::{
    inverse_power_gap, log_variance_bound, pinch, pinch_povm, pinched_log_variance,
    pinched_log_variance_unchecked, pinching_bound_margin,
};
pub use tensor::{local_log_sum, tensor_power, ProductOperator};

pub(crate) use measurement::default_degeneracy_tol;
