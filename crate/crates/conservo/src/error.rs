//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("grid shape mismatch: shape holds {shape_len} scalars, state holds {state_len}")]
    ShapeMismatch { shape_len: usize, state_len: usize },

    #[error("non-finite value in {context} at index {index}")]
    NonFinite { context: String, index: usize },

    #[error("invariant '{name}' evaluated to a non-finite value")]
    NonFiniteInvariant { name: String },

    #[error("non-finite Runge-Kutta stage {stage}")]
    NonFiniteStage { stage: usize },

    #[error("unknown tableau '{name}'; valid names: RK1, RK2, RK3, RK4, RK5")]
    UnknownTableau { name: String },

    #[error(
        "singular projection directions: normal-matrix condition estimate {cond:.3e} \
         exceeds 1e12 (invariant gradients are not of full column rank)"
    )]
    SingularDirections { cond: f64 },

    #[error("zero gradient column for invariant '{name}': no projection direction")]
    ZeroGradient { name: String },

    #[error("Newton Jacobian singular at iteration {iteration}")]
    SingularNewtonJacobian { iteration: usize },

    #[error(
        "Newton projection did not converge: residual {residual:.3e} > tolerance {tol:.3e} \
         after {iterations} iterations"
    )]
    NewtonDidNotConverge {
        iterations: usize,
        residual: f64,
        tol: f64,
    },

    #[error("collision singularity in '{system}': separation {distance:.3e} below guard 1e-12")]
    CollisionSingularity { system: String, distance: f64 },

    #[error("integration aborted at t = {time:.6e}: {source}")]
    Aborted {
        time: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("unknown invariant name '{name}'; available: {available}")]
    UnknownInvariant { name: String, available: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("error series: {0}")]
    InvalidSeries(String),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
