//! The conservative-system abstraction every integrator consumes.

use crate::error::Result;
use crate::invariant::InvariantSet;
use crate::state::{GridShape, StateVector};

/// An autonomous ODE dy/dt = f(y) together with its first integrals.
pub trait ConservativeSystem: Send + Sync {
    fn name(&self) -> &str;

    fn dim(&self) -> usize;

    /// Right-hand side f(y). Systems with collision singularities return an
    /// error instead of producing non-finite values.
    fn rhs(&self, y: &[f64]) -> Result<Vec<f64>>;

    /// Full invariant bundle with reference values at the system's initial state.
    fn invariants(&self) -> InvariantSet;

    fn initial_state(&self) -> StateVector;

    /// Exact solution at time t when one is known.
    fn exact_solution(&self, _t: f64) -> Option<Vec<f64>> {
        None
    }

    /// Grid structure for PDE states, if any.
    fn grid_shape(&self) -> Option<GridShape> {
        None
    }

    /// Separable-Hamiltonian view, when the system admits H = T(p) + V(q).
    fn as_separable(&self) -> Option<&dyn SeparableHamiltonian> {
        None
    }
}

/// Split Hamiltonian H(q, p) = T(p) + V(q) with the state stored as [q; p].
pub trait SeparableHamiltonian: ConservativeSystem {
    /// dT/dp, length d/2.
    fn grad_kinetic(&self, p: &[f64]) -> Vec<f64>;
    /// dV/dq, length d/2.
    fn grad_potential(&self, q: &[f64]) -> Result<Vec<f64>>;
}

/// |grad g . f| <= tol * (|grad g| |f|), checked for every invariant at `y`.
/// Returns the worst normalized directional derivative.
pub fn first_integral_defect(sys: &dyn ConservativeSystem, y: &StateVector) -> Result<f64> {
    let f = sys.rhs(y.as_slice())?;
    let inv = sys.invariants();
    let grads = inv.gradients(y)?;
    let nf = norm(&f);
    let mut worst: f64 = 0.0;
    for g in &grads {
        let dot: f64 = g.iter().zip(&f).map(|(a, b)| a * b).sum();
        let ng = norm(g);
        let scale = ng * nf;
        if scale > 0.0 {
            worst = worst.max(dot.abs() / scale);
        }
    }
    Ok(worst)
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
