//! Turing instability analysis and simulation for a ratio-dependent
//! predator-prey reaction-diffusion model on `[0, l]` with Neumann ends.
//!
//! - [`kinetics`]: reaction terms, null-clines, equilibrium and Jacobian.
//! - [`turing`]: mode matrices, stability classification, critical
//!   diffusivity and the small-amplitude pattern.
//! - [`solver`]: positivity-preserving explicit finite differences.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod kinetics;
pub mod solver;
pub mod turing;

pub use error::{Error, Result};
pub use kinetics::{
    find_equilibrium, jacobian_thetas, kinetic_stability, mortality, nondimensionalize,
    predator_nullcline, prey_nullcline, reaction_terms, DimensionalParams, Equilibrium,
    KineticParams, KineticVerdict, Thetas,
};
pub use solver::{
    apply_boundary, max_timestep, norms, run, step, GridState, Reference, RunReport, SolverConfig,
};
pub use turing::{
    classify, critical_eigenvector, d1_window, d2_critical, mode_eigenvalue, mode_matrix,
    small_amplitude_pattern, DiffusionParams, LinearMode, PatternSpec, StabilityVerdict,
    VerdictKind,
};
