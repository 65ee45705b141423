//! Invariant projection: the explicit one-Newton-step correction applied after
//! an RK predictor, plus the iterated orthogonal-projection comparator.
//!
//! One step does
//!   y_hat = Phi_h(y_n)
//!   lambda = -(G(dir)^T G(dir))^{-1} g(y_hat)        (single Newton step from 0)
//!   y_next = y_hat + G(dir) lambda
//! where G holds the invariant gradients evaluated at the chosen direction
//! point. The iterated variant keeps applying Newton updates to
//! g(y_hat + G lambda) = 0 and reduces to the explicit step for k = 1.

use crate::error::{Error, Result};
use crate::invariant::InvariantSet;
use crate::linalg::SmallMatrix;
use crate::rk::{rk_step, ButcherTableau};
use crate::state::StateVector;
use crate::system::{dot, norm, ConservativeSystem};

/// Where the projection direction gradients are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ProjectionDirection {
    /// grad g at the RK predictor (the standard choice).
    #[default]
    AtPredicted,
    /// grad g at the previous accepted state.
    AtPrevious,
    /// grad g at the midpoint of the previous state and the predictor.
    AtMidpoint,
}

impl ProjectionDirection {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "predicted" => Ok(Self::AtPredicted),
            "previous" => Ok(Self::AtPrevious),
            "midpoint" => Ok(Self::AtMidpoint),
            other => Err(Error::InvalidArgument(format!(
                "unknown projection direction '{other}'; valid: predicted, previous, midpoint"
            ))),
        }
    }
}

/// Newton iteration policy for the orthogonal-projection comparator.
/// `tol == 0` means "run exactly `max_iters` iterations".
#[derive(Debug, Clone, Copy)]
pub struct NewtonPolicy {
    pub max_iters: usize,
    pub tol: f64,
}

impl NewtonPolicy {
    pub fn exact_iterations(k: usize) -> Self {
        Self { max_iters: k, tol: 0.0 }
    }

    pub fn converged(k: usize, tol: f64) -> Self {
        Self { max_iters: k, tol }
    }

    fn validate(&self) -> Result<()> {
        if self.max_iters < 1 {
            return Err(Error::InvalidArgument("Newton policy needs k >= 1".into()));
        }
        if self.tol < 0.0 {
            return Err(Error::InvalidArgument("Newton tolerance must be >= 0".into()));
        }
        Ok(())
    }
}

/// Gradient columns, each of length d.
pub type GradientColumns = Vec<Vec<f64>>;

/// Multiplier for the correction y = y_hat + G lambda from the normal equations
/// lambda = -(G^T G)^{-1} residual. Columns are equilibrated before the solve,
/// which leaves the correction mathematically unchanged but keeps the l x l
/// system well scaled when invariants live on wildly different scales.
pub fn eip_lambda(residual: &[f64], gradients: &GradientColumns) -> Result<Vec<f64>> {
    solve_multiplier(gradients, gradients, residual, None)
}

/// lambda solving  (G_resid^T D) lambda = -residual  where D holds the
/// direction columns and G_resid the gradients governing the residual change.
/// The two coincide for the standard direction choice.
fn solve_multiplier(
    g_resid: &GradientColumns,
    directions: &GradientColumns,
    residual: &[f64],
    names: Option<&[&str]>,
) -> Result<Vec<f64>> {
    let l = directions.len();
    debug_assert_eq!(g_resid.len(), l);
    debug_assert_eq!(residual.len(), l);

    let mut row_scale = Vec::with_capacity(l);
    let mut col_scale = Vec::with_capacity(l);
    for i in 0..l {
        let rn = norm(&g_resid[i]);
        let cn = norm(&directions[i]);
        if rn == 0.0 || cn == 0.0 {
            let name = names.map(|n| n[i].to_string()).unwrap_or_else(|| format!("#{i}"));
            return Err(Error::ZeroGradient { name });
        }
        row_scale.push(rn);
        col_scale.push(cn);
    }

    let mut m = SmallMatrix::zeros(l);
    for i in 0..l {
        for j in 0..l {
            m.set(i, j, dot(&g_resid[i], &directions[j]) / (row_scale[i] * col_scale[j]));
        }
    }
    let cond = m.condition_estimate();
    if !(cond <= 1e12) {
        return Err(Error::SingularDirections { cond });
    }
    let rhs: Vec<f64> = residual
        .iter()
        .zip(&row_scale)
        .map(|(r, s)| -r / s)
        .collect();
    let mu = m.solve(&rhs)?;
    Ok(mu.iter().zip(&col_scale).map(|(v, s)| v / s).collect())
}

fn apply_correction(y_hat: &StateVector, directions: &GradientColumns, lambda: &[f64]) -> Vec<f64> {
    let mut out = y_hat.as_slice().to_vec();
    for (col, &lam) in directions.iter().zip(lambda) {
        if lam != 0.0 {
            for (o, g) in out.iter_mut().zip(col) {
                *o += lam * g;
            }
        }
    }
    out
}

fn direction_point(
    dir: ProjectionDirection,
    y_n: &StateVector,
    y_hat: &StateVector,
) -> Option<Vec<f64>> {
    match dir {
        ProjectionDirection::AtPredicted => None,
        ProjectionDirection::AtPrevious => Some(y_n.as_slice().to_vec()),
        ProjectionDirection::AtMidpoint => Some(
            y_n.as_slice()
                .iter()
                .zip(y_hat.as_slice())
                .map(|(a, b)| 0.5 * (a + b))
                .collect(),
        ),
    }
}

fn warn_if_off_manifold(inv: &InvariantSet, y: &StateVector) {
    if let Ok(res) = inv.evaluate(y) {
        // diagnostic only; tolerance scales with the reference invariant so
        // SI-sized systems are judged relatively
        let worst = res
            .iter()
            .zip(inv.references())
            .map(|(r, scale)| r.abs() / scale.abs().max(1.0))
            .fold(0.0f64, f64::max);
        if worst > 1e-10 {
            log::warn!(
                "projection step entered with off-manifold state: |g| = {worst:.3e} > 1e-10 (scaled)"
            );
        }
    }
}

/// Detailed output of one explicit projected step.
#[derive(Debug, Clone)]
pub struct EipStep {
    pub state: StateVector,
    pub predictor: StateVector,
    pub lambda: Vec<f64>,
}

/// One explicit invariant-projected step with full diagnostics.
pub fn eip_step_detailed(
    sys: &dyn ConservativeSystem,
    inv: &InvariantSet,
    y_n: &StateVector,
    h: f64,
    tab: &ButcherTableau,
    dir: ProjectionDirection,
) -> Result<EipStep> {
    warn_if_off_manifold(inv, y_n);
    let y_hat = rk_step(sys, y_n, h, tab)?;
    let residual = inv.evaluate(&y_hat)?;
    let g_hat = inv.gradients(&y_hat)?;
    let names = inv.names();
    let dir_cols_owned = match direction_point(dir, y_n, &y_hat) {
        None => None,
        Some(point) => Some(inv.gradients(&StateVector::new(point)?)?),
    };
    let dir_cols = dir_cols_owned.as_ref().unwrap_or(&g_hat);
    let lambda = solve_multiplier(&g_hat, dir_cols, &residual, Some(&names))?;
    let state = StateVector::new(apply_correction(&y_hat, dir_cols, &lambda))?;
    Ok(EipStep {
        state,
        predictor: y_hat,
        lambda,
    })
}

/// One explicit invariant-projected step.
pub fn eip_step(
    sys: &dyn ConservativeSystem,
    inv: &InvariantSet,
    y_n: &StateVector,
    h: f64,
    tab: &ButcherTableau,
    dir: ProjectionDirection,
) -> Result<StateVector> {
    Ok(eip_step_detailed(sys, inv, y_n, h, tab, dir)?.state)
}

/// Outcome of the iterated orthogonal projection.
#[derive(Debug, Clone)]
pub struct NewtonProjection {
    pub state: StateVector,
    pub iterations: usize,
    pub residual_norm: f64,
    pub lambda: Vec<f64>,
}

/// RK predictor followed by a Newton iteration on g(y_hat + G lambda) = 0,
/// starting from lambda = 0 with the direction matrix frozen at the predictor.
/// With `NewtonPolicy::exact_iterations(1)` this reproduces `eip_step` exactly.
pub fn newton_projection_step(
    sys: &dyn ConservativeSystem,
    inv: &InvariantSet,
    y_n: &StateVector,
    h: f64,
    tab: &ButcherTableau,
    policy: NewtonPolicy,
) -> Result<NewtonProjection> {
    policy.validate()?;
    warn_if_off_manifold(inv, y_n);
    let y_hat = rk_step(sys, y_n, h, tab)?;
    let g_hat = inv.gradients(&y_hat)?;
    let names = inv.names();
    let mut lambda = vec![0.0; inv.len()];
    let mut iterations = 0;
    for it in 0..policy.max_iters {
        let moved = StateVector::new(apply_correction(&y_hat, &g_hat, &lambda))?;
        let residual = inv.evaluate(&moved)?;
        let residual_norm = residual.iter().fold(0.0f64, |m, r| m.max(r.abs()));
        if policy.tol > 0.0 && residual_norm <= policy.tol {
            return Ok(NewtonProjection {
                state: moved,
                iterations,
                residual_norm,
                lambda,
            });
        }
        let g_moved = inv.gradients(&moved)?;
        let delta =
            solve_multiplier(&g_moved, &g_hat, &residual, Some(&names)).map_err(|e| match e {
                Error::SingularDirections { .. } => Error::SingularNewtonJacobian { iteration: it },
                other => other,
            })?;
        for (lam, d) in lambda.iter_mut().zip(&delta) {
            *lam += d;
        }
        iterations = it + 1;
    }
    let state = StateVector::new(apply_correction(&y_hat, &g_hat, &lambda))?;
    let residual = inv.evaluate(&state)?;
    let residual_norm = residual.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    if policy.tol > 0.0 && residual_norm > policy.tol {
        return Err(Error::NewtonDidNotConverge {
            iterations,
            residual: residual_norm,
            tol: policy.tol,
        });
    }
    Ok(NewtonProjection {
        state,
        iterations,
        residual_norm,
        lambda,
    })
}

/// Analytic projection multiplier for the quadratic oscillator Hamiltonian
/// H = (omega/2) y.y: the smallest-magnitude root of the projection equation,
/// -(1/omega)(1 - |y0|/|y_hat|), evaluated in cancellation-free form.
pub fn lambda_star_harmonic(omega: f64, y0: &StateVector, y_hat: &StateVector) -> Result<f64> {
    if omega <= 0.0 {
        return Err(Error::InvalidArgument("omega must be > 0".into()));
    }
    let s0 = dot(y0.as_slice(), y0.as_slice());
    let s = dot(y_hat.as_slice(), y_hat.as_slice());
    if s == 0.0 {
        return Err(Error::InvalidArgument(
            "lambda_star undefined at |y_hat| = 0".into(),
        ));
    }
    // 1 - sqrt(s0/s) = (s - s0) / (s + sqrt(s*s0))
    Ok(-(s - s0) / (omega * (s + (s * s0).sqrt())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rk::tableau;
    use crate::systems::{HarmonicOscillator, PerturbedKepler};

    #[test]
    fn zero_residual_gives_zero_multiplier() {
        let g = vec![vec![1.0, 2.0, 0.0], vec![0.0, 1.0, -1.0]];
        let lam = eip_lambda(&[0.0, 0.0], &g).unwrap();
        assert_eq!(lam, vec![0.0, 0.0]);
    }

    #[test]
    fn single_invariant_formula() {
        // lambda = -g / |grad g|^2 = -0.5 / 5 = -0.1
        let lam = eip_lambda(&[0.5], &vec![vec![1.0, 2.0]]).unwrap();
        assert!((lam[0] + 0.1).abs() < 1e-15);
    }

    #[test]
    fn harmonic_closed_form_agrees_with_general_solve() {
        // -g/|grad g|^2 versus -(1/(2w))(1 - |y0|^2/|y|^2). The two float
        // paths share no intermediate, so agreement is limited by the
        // rounding of H(y_hat) - H(y0), about 1e-14 relative here.
        let omega = 10.0;
        let y_hat = StateVector::new(vec![1.01, 0.02]).unwrap();
        let s = y_hat[0] * y_hat[0] + y_hat[1] * y_hat[1];
        let s0 = 1.0;
        let closed = -(1.0 / (2.0 * omega)) * (1.0 - s0 / s);
        let residual = 0.5 * omega * s - 0.5 * omega * s0;
        let grad = vec![vec![omega * y_hat[0], omega * y_hat[1]]];
        let lam = eip_lambda(&[residual], &grad).unwrap();
        assert!(
            (lam[0] - closed).abs() <= 2e-14 * closed.abs(),
            "{} vs {}",
            lam[0],
            closed
        );
    }

    #[test]
    fn stationary_system_is_fixed() {
        struct Still;
        impl ConservativeSystem for Still {
            fn name(&self) -> &str {
                "still"
            }
            fn dim(&self) -> usize {
                2
            }
            fn rhs(&self, y: &[f64]) -> Result<Vec<f64>> {
                Ok(vec![0.0; y.len()])
            }
            fn invariants(&self) -> InvariantSet {
                InvariantSet::new(
                    vec![crate::invariant::Invariant::new(
                        "Q",
                        |y: &[f64]| y[0] * y[0] + 3.0 * y[1] * y[1],
                        |y: &[f64]| vec![2.0 * y[0], 6.0 * y[1]],
                    )],
                    &self.initial_state(),
                )
                .unwrap()
            }
            fn initial_state(&self) -> StateVector {
                StateVector::new(vec![0.7, -0.2]).unwrap()
            }
        }
        let sys = Still;
        let inv = sys.invariants();
        let y0 = sys.initial_state();
        let tab = tableau("RK4").unwrap();
        let out = eip_step(&sys, &inv, &y0, 0.25, &tab, ProjectionDirection::AtPredicted).unwrap();
        assert_eq!(out.as_slice(), y0.as_slice());
    }

    #[test]
    fn lambda_error_against_table_values() {
        // one EIP step of the oscillator after integrating to t = 1
        let sys = HarmonicOscillator::new(10.0);
        let inv = sys.invariants();
        let tab = tableau("RK4").unwrap();
        let y0 = sys.initial_state();
        let mut y = y0.clone();
        let h = 0.1;
        let mut last = None;
        for _ in 0..10 {
            let step =
                eip_step_detailed(&sys, &inv, &y, h, &tab, ProjectionDirection::AtPredicted)
                    .unwrap();
            last = Some((step.lambda[0], step.predictor.clone()));
            y = step.state;
        }
        let (lam, y_hat) = last.unwrap();
        let star = lambda_star_harmonic(10.0, &y0, &y_hat).unwrap();
        let err = (lam - star).abs();
        // tabulated value 1.8688e-06 for RK4, h = 0.1
        assert!(
            (err - 1.8688e-6).abs() < 2e-10,
            "lambda error {err:e} != 1.8688e-06"
        );
    }

    #[test]
    fn newton_one_iteration_equals_explicit_step() {
        let sys = PerturbedKepler::new(0.6);
        let inv = sys.invariants();
        let tab = tableau("RK3").unwrap();
        let mut y = sys.initial_state();
        for _ in 0..25 {
            let a = eip_step(&sys, &inv, &y, 0.02, &tab, ProjectionDirection::AtPredicted).unwrap();
            let b = newton_projection_step(&sys, &inv, &y, 0.02, &tab, NewtonPolicy::exact_iterations(1))
                .unwrap();
            for (x, z) in a.as_slice().iter().zip(b.state.as_slice()) {
                let scale = x.abs().max(z.abs()).max(1e-300);
                assert!((x - z).abs() <= 1e-15 * scale);
            }
            y = a;
        }
    }

    #[test]
    fn converged_newton_is_a_lambda_oracle() {
        // fully converged Newton reproduces the analytic root of the
        // projection equation for the oscillator
        let sys = HarmonicOscillator::new(10.0);
        let inv = sys.invariants();
        let tab = tableau("RK2").unwrap();
        let y0 = sys.initial_state();
        let out =
            newton_projection_step(&sys, &inv, &y0, 0.05, &tab, NewtonPolicy::converged(20, 1e-14))
                .unwrap();
        assert!(out.residual_norm <= 1e-14);
        let y_hat = rk_step(&sys, &y0, 0.05, &tab).unwrap();
        let star = lambda_star_harmonic(10.0, &y0, &y_hat).unwrap();
        assert!((out.lambda[0] - star).abs() <= 1e-13);
    }

    #[test]
    fn kepler_converged_newton_hits_machine_residual() {
        let sys = PerturbedKepler::new(0.6);
        let inv = sys.invariants();
        let tab = tableau("RK4").unwrap();
        let y0 = sys.initial_state();
        let out =
            newton_projection_step(&sys, &inv, &y0, 0.03, &tab, NewtonPolicy::converged(20, 1e-14))
                .unwrap();
        assert!(out.residual_norm <= 1e-13);
    }

    #[test]
    fn lambda_star_edge_cases() {
        let y0 = StateVector::new(vec![1.0, 0.0]).unwrap();
        let same = StateVector::new(vec![0.6, 0.8]).unwrap();
        assert_eq!(lambda_star_harmonic(10.0, &y0, &same).unwrap(), 0.0);
        let stretched = StateVector::new(vec![1.1, 0.0]).unwrap();
        let lam = lambda_star_harmonic(10.0, &y0, &stretched).unwrap();
        assert!((lam + (1.0 - 1.0 / 1.1) / 10.0).abs() < 1e-17);
        let origin = StateVector::new(vec![0.0, 0.0]).unwrap();
        assert!(lambda_star_harmonic(10.0, &y0, &origin).is_err());
    }

    #[test]
    fn collinear_directions_are_singular() {
        let g = vec![vec![1.0, 2.0], vec![2.0, 4.0]];
        match eip_lambda(&[0.1, 0.2], &g) {
            Err(Error::SingularDirections { cond }) => assert!(cond > 1e12),
            other => panic!("expected singular-direction error, got {other:?}"),
        }
    }

    #[test]
    fn zero_gradient_is_reported() {
        let g = vec![vec![0.0, 0.0]];
        assert!(matches!(
            eip_lambda(&[0.1], &g),
            Err(Error::ZeroGradient { .. })
        ));
    }
}
