use thiserror::Error;

/// Errors raised by the analysis and simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("prey null-cline is singular at n = {n} (alpha - (1 - n) = 0)")]
    Singularity { n: f64 },

    #[error("no interior equilibrium: H1 - H2 has no sign change on ({lower}, {upper})")]
    NoInteriorEquilibrium { lower: f64, upper: f64 },

    #[error("equilibrium is kinetically unstable (trace A = {trace_a}, det A = {det_a})")]
    KineticallyUnstable { trace_a: f64, det_a: f64 },

    #[error("empty d1 window: theta1 = {theta1} <= 0, the equilibrium is stable for every d2")]
    EmptyWindow { theta1: f64 },

    #[error("d1 = {d1} lies outside the Turing window [{lower}, {upper})")]
    WindowViolation { d1: f64, lower: f64, upper: f64 },

    #[error("B1 is not singular: det = {det}, tolerance = {tolerance}")]
    NotSingular { det: f64, tolerance: f64 },

    #[error("postcondition failed: {0}")]
    Postcondition(String),

    #[error("grid too small: N_h = {n_h}, need at least 3 intervals")]
    GridTooSmall { n_h: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("time step {dt} exceeds the positivity bound {bound}")]
    StepRejected { dt: f64, bound: f64 },

    #[error("non-finite value at step {step} (t = {t})")]
    NonFiniteState { step: u64, t: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
