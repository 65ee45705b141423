//! Linear oscillator dy = [[0, w], [-w, 0]] y with quadratic energy.

use crate::error::Result;
use crate::invariant::{Invariant, InvariantSet};
use crate::state::StateVector;
use crate::system::ConservativeSystem;

/// Harmonic oscillator with H(y) = (omega/2) y.y; the exact flow is a rotation.
#[derive(Debug, Clone)]
pub struct HarmonicOscillator {
    omega: f64,
    y0: Vec<f64>,
}

impl HarmonicOscillator {
    pub fn new(omega: f64) -> Self {
        assert!(omega > 0.0, "omega must be positive");
        Self {
            omega,
            y0: vec![1.0, 0.0],
        }
    }

    pub fn with_initial(omega: f64, y0: [f64; 2]) -> Self {
        assert!(omega > 0.0);
        Self {
            omega,
            y0: y0.to_vec(),
        }
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn energy(&self, y: &[f64]) -> f64 {
        0.5 * self.omega * (y[0] * y[0] + y[1] * y[1])
    }
}

impl ConservativeSystem for HarmonicOscillator {
    fn name(&self) -> &str {
        "harmonic"
    }

    fn dim(&self) -> usize {
        2
    }

    fn rhs(&self, y: &[f64]) -> Result<Vec<f64>> {
        Ok(vec![self.omega * y[1], -self.omega * y[0]])
    }

    fn invariants(&self) -> InvariantSet {
        let w = self.omega;
        let h = Invariant::new(
            "H",
            move |y: &[f64]| 0.5 * w * (y[0] * y[0] + y[1] * y[1]),
            move |y: &[f64]| vec![w * y[0], w * y[1]],
        );
        InvariantSet::new(vec![h], &self.initial_state()).expect("finite reference energy")
    }

    fn initial_state(&self) -> StateVector {
        StateVector::new(self.y0.clone()).expect("finite initial state")
    }

    fn exact_solution(&self, t: f64) -> Option<Vec<f64>> {
        let (s, c) = (self.omega * t).sin_cos();
        Some(vec![
            c * self.y0[0] + s * self.y0[1],
            -s * self.y0[0] + c * self.y0[1],
        ])
    }
}
