//! Smoothing operators `D′(M, E) → Γ(N, F)` split as sums of a smooth kernel
//! section of `E* ⊠ F` tensored with a scalar smoothing kernel, together with
//! the direct-kernel oracle they are checked against.

mod families;
mod kernel;
mod operator;

pub use families::{mollifier, mollifier_with, MollifierFamily, MollifierRegistry, VonMises, WrappedGaussian, MIN_WIDTH_IN_CELLS};
pub use kernel::{ScalarSmoothingKernel, SmoothingOperator, VectorKernel, MAX_PAIRS, NORMALIZATION_TOL};
pub use operator::{
    apply_scalar, apply_vector, balanced_move_check, balanced_move_deviation, convergence_csv, convergence_study,
    direct_kernel_apply, regularize,
};
