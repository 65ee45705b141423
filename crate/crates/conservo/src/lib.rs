//! Structure-preserving explicit integration: explicit Runge-Kutta predictors
//! corrected by a single explicit Newton-projection step onto the invariant
//! manifold, with iterated orthogonal projection as a comparator.
//!
//! The crate bundles the integrators, a set of conservative benchmark systems
//! (oscillator, perturbed Kepler, ten-body solar system, charged particle in
//! uniform and tokamak fields), a Fourier-pseudospectral semi-discretization
//! of the rotating Gross-Pitaevskii equation, and the convergence-analysis
//! machinery used by the experiment runner.

pub mod analysis;
pub mod error;
pub mod gpe;
pub mod invariant;
pub mod linalg;
pub mod projection;
pub mod rk;
pub mod state;
pub mod system;
pub mod systems;

pub use error::{Error, Result};
pub use invariant::{Invariant, InvariantSet};
pub use projection::{
    eip_lambda, eip_step, eip_step_detailed, lambda_star_harmonic, newton_projection_step,
    EipStep, NewtonPolicy, NewtonProjection, ProjectionDirection,
};
pub use rk::{rk_step, rk_step_f, tableau, ButcherTableau, TABLEAU_NAMES};
pub use state::{
    devectorize_complex, devectorize_real, vectorize_complex, vectorize_real, GridShape,
    StateVector,
};
pub use system::{first_integral_defect, ConservativeSystem, SeparableHamiltonian};
