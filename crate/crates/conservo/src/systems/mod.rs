//! Benchmark conservative systems with their invariants and reference data.

mod harmonic;
mod kepler;
mod particle;
mod solar;
mod verlet;

pub use harmonic::HarmonicOscillator;
pub use kepler::PerturbedKepler;
pub use particle::{ChargedParticle2D, FieldConfig};
pub use solar::{SolarBody, SolarSystem, GRAVITATIONAL_CONSTANT, SECONDS_PER_YEAR};
pub use verlet::stormer_verlet_step;

use crate::error::{Error, Result};
use crate::system::ConservativeSystem;

/// Systems the experiment runner can instantiate by name.
pub const SYSTEM_NAMES: [&str; 5] = [
    "harmonic",
    "kepler",
    "solar",
    "particle-uniform",
    "particle-tokamak",
];

/// Build a system from its registry name with default parameters.
pub fn system_by_name(name: &str) -> Result<Box<dyn ConservativeSystem>> {
    match name {
        "harmonic" => Ok(Box::new(HarmonicOscillator::new(10.0))),
        "kepler" => Ok(Box::new(PerturbedKepler::new(0.6))),
        "solar" => Ok(Box::new(SolarSystem::from_ephemeris())),
        "particle-uniform" => Ok(Box::new(ChargedParticle2D::new(FieldConfig::Uniform))),
        "particle-tokamak" => Ok(Box::new(ChargedParticle2D::new(FieldConfig::Tokamak))),
        other => Err(Error::InvalidArgument(format!(
            "unknown system '{other}'; valid: {}",
            SYSTEM_NAMES.join(", ")
        ))),
    }
}
