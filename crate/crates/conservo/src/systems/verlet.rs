//! Second-order Stormer-Verlet step for separable Hamiltonians H = T(p) + V(q).

use crate::error::Result;
use crate::state::StateVector;
use crate::system::SeparableHamiltonian;

/// Kick-drift-kick composition:
///   p_half = p - (h/2) grad V(q)
///   q_next = q + h grad T(p_half)
///   p_next = p_half - (h/2) grad V(q_next)
pub fn stormer_verlet_step(
    sys: &dyn SeparableHamiltonian,
    y: &StateVector,
    h: f64,
) -> Result<StateVector> {
    let d = y.dim();
    let half = d / 2;
    let (q, p) = y.as_slice().split_at(half);
    let gv = sys.grad_potential(q)?;
    let mut p_half: Vec<f64> = p
        .iter()
        .zip(&gv)
        .map(|(pi, g)| pi - 0.5 * h * g)
        .collect();
    let gt = sys.grad_kinetic(&p_half);
    let q_next: Vec<f64> = q.iter().zip(&gt).map(|(qi, g)| qi + h * g).collect();
    let gv2 = sys.grad_potential(&q_next)?;
    for (pi, g) in p_half.iter_mut().zip(&gv2) {
        *pi -= 0.5 * h * g;
    }
    let mut out = q_next;
    out.extend(p_half);
    StateVector::new(out)
}
