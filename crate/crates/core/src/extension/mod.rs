//! Weighted harmonic extension to the upper half space and the objects built on it.

mod barrier;
mod config;
mod elliptic;
mod energy;
mod field;
mod kernel;

pub use barrier::{
    barrier_report, f1_report, f1_solution, f1_spec, f2_report, f2_solution, f2_spec, BarrierReport, F1Report,
    F2Report, FIT_RANGE, STRIP_LENGTH,
};
pub use config::{ExtensionConfig, ExtensionMethod};
pub use elliptic::{satisfies_maximum_principle, solve_weighted_laplace, BoundarySpec, BoxSolution, MAX_ITERATIONS};
pub use energy::{log_trapezoid, smooth_step, weighted_dirichlet_energy, Cutoff};
pub use field::{extend, extend_to_heights, flux_constant, normal_derivative_limit, ExtensionField, NormalLimit, LIMIT_TOLERANCE};
pub use kernel::{KernelProfile, KERNEL_CUTOFF};
