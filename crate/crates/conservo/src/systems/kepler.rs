//! Planar Kepler problem with a 1/r^3 relativistic correction term.

use crate::error::{Error, Result};
use crate::invariant::{Invariant, InvariantSet};
use crate::state::StateVector;
use crate::system::{ConservativeSystem, SeparableHamiltonian};

const PERTURBATION: f64 = 0.005;
const COLLISION_GUARD: f64 = 1e-12;

/// Two-body problem in the potential -1/r - 0.005/(2 r^3), state (q1, q2, p1, p2).
///
/// Initial condition q = (1 - e, 0), p = (0, sqrt((1+e)/(1-e))) starts at the
/// perihelion of the orbit with eccentricity e. Invariants: energy H and
/// angular momentum L = q1 p2 - q2 p1.
#[derive(Debug, Clone)]
pub struct PerturbedKepler {
    eccentricity: f64,
}

impl PerturbedKepler {
    pub fn new(eccentricity: f64) -> Self {
        assert!(
            (0.0..1.0).contains(&eccentricity),
            "eccentricity must lie in [0, 1)"
        );
        Self { eccentricity }
    }

    pub fn hamiltonian(y: &[f64]) -> f64 {
        let r2 = y[0] * y[0] + y[1] * y[1];
        let r = r2.sqrt();
        0.5 * (y[2] * y[2] + y[3] * y[3]) - 1.0 / r - 0.5 * PERTURBATION / (r2 * r)
    }

    pub fn angular_momentum(y: &[f64]) -> f64 {
        y[0] * y[3] - y[1] * y[2]
    }

    fn guard(&self, r: f64) -> Result<()> {
        if r < COLLISION_GUARD {
            return Err(Error::CollisionSingularity {
                system: "kepler".into(),
                distance: r,
            });
        }
        Ok(())
    }
}

fn grad_h(y: &[f64]) -> Vec<f64> {
    let r2 = y[0] * y[0] + y[1] * y[1];
    let r = r2.sqrt();
    let a = 1.0 / (r2 * r) + 1.5 * PERTURBATION / (r2 * r2 * r);
    vec![y[0] * a, y[1] * a, y[2], y[3]]
}

impl ConservativeSystem for PerturbedKepler {
    fn name(&self) -> &str {
        "kepler"
    }

    fn dim(&self) -> usize {
        4
    }

    fn rhs(&self, y: &[f64]) -> Result<Vec<f64>> {
        let r2 = y[0] * y[0] + y[1] * y[1];
        let r = r2.sqrt();
        self.guard(r)?;
        let a = 1.0 / (r2 * r) + 1.5 * PERTURBATION / (r2 * r2 * r);
        Ok(vec![y[2], y[3], -y[0] * a, -y[1] * a])
    }

    fn invariants(&self) -> InvariantSet {
        let h = Invariant::new("H", PerturbedKepler::hamiltonian, grad_h);
        let l = Invariant::new("L", PerturbedKepler::angular_momentum, |y: &[f64]| {
            vec![y[3], -y[2], -y[1], y[0]]
        });
        InvariantSet::new(vec![h, l], &self.initial_state()).expect("finite reference invariants")
    }

    fn initial_state(&self) -> StateVector {
        let e = self.eccentricity;
        StateVector::new(vec![1.0 - e, 0.0, 0.0, ((1.0 + e) / (1.0 - e)).sqrt()])
            .expect("finite initial state")
    }

    fn as_separable(&self) -> Option<&dyn SeparableHamiltonian> {
        Some(self)
    }
}

impl SeparableHamiltonian for PerturbedKepler {
    fn grad_kinetic(&self, p: &[f64]) -> Vec<f64> {
        p.to_vec()
    }

    fn grad_potential(&self, q: &[f64]) -> Result<Vec<f64>> {
        let r2 = q[0] * q[0] + q[1] * q[1];
        let r = r2.sqrt();
        self.guard(r)?;
        let a = 1.0 / (r2 * r) + 1.5 * PERTURBATION / (r2 * r2 * r);
        Ok(vec![q[0] * a, q[1] * a])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::invariant::central_difference_gradient;
    use crate::rk::{rk_step, tableau};
    use crate::system::first_integral_defect;

    #[test]
    fn reference_invariants() {
        let sys = PerturbedKepler::new(0.6);
        let y0 = sys.initial_state();
        assert_eq!(y0.as_slice(), &[0.4, 0.0, 0.0, 2.0]);
        let inv = sys.invariants();
        // H = 2 - 2.5 - 0.0025/0.064, L = 0.8, both exact in binary
        assert_eq!(inv.references(), &[-0.5390625, 0.8]);
        assert_eq!(inv.evaluate(&y0).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn rhs_at_reference_is_hamiltonian_flow() {
        let sys = PerturbedKepler::new(0.6);
        let f = sys.rhs(&[0.4, 0.0, 0.0, 2.0]).unwrap();
        assert_eq!(&f[..2], &[0.0, 2.0]);
        // dp/dt = -q (1/r^3 + 0.0075/r^5): r = 0.4
        let a = 1.0 / 0.4f64.powi(3) + 0.0075 / 0.4f64.powi(5);
        assert!((f[2] + 0.4 * a).abs() < 1e-13);
        assert_eq!(f[3], 0.0);
    }

    #[test]
    fn angular_momentum_gradient() {
        let y = [0.4, 0.0, 0.0, 2.0];
        let sys = PerturbedKepler::new(0.6);
        let inv = sys.invariants();
        let cols = inv.gradients(&StateVector::new(y.to_vec()).unwrap()).unwrap();
        assert_eq!(cols[1], vec![2.0, 0.0, 0.0, 0.4]);
    }

    #[test]
    fn gradients_match_finite_differences_along_the_orbit() {
        let sys = PerturbedKepler::new(0.6);
        let inv = sys.invariants();
        let tab = tableau("RK4").unwrap();
        let mut y = sys.initial_state();
        for _ in 0..40 {
            y = rk_step(&sys, &y, 0.02, &tab).unwrap();
            let cols = inv.gradients(&y).unwrap();
            for (k, item) in inv.items().iter().enumerate() {
                let fd = central_difference_gradient(&|v: &[f64]| item.value(v), y.as_slice(), 1e-6);
                for (a, b) in fd.iter().zip(&cols[k]) {
                    assert!(
                        (a - b).abs() <= 1e-6 * b.abs().max(1.0),
                        "{}: fd {a} vs analytic {b}",
                        item.name()
                    );
                }
            }
            assert!(first_integral_defect(&sys, &y).unwrap() <= 1e-10);
        }
    }

    #[test]
    fn collision_guard_fires() {
        let sys = PerturbedKepler::new(0.6);
        let err = sys.rhs(&[1e-13, 0.0, 0.0, 0.0]).unwrap_err();
        assert!(matches!(err, Error::CollisionSingularity { .. }));
    }
}
