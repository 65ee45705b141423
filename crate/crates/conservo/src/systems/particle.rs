//! Charged particle in a static magnetic field, canonical coordinates (x, p)
//! with p = v + A(x) under the normalization q = m = 1.
//!
//! H(x, p) = 1/2 (p - A).(p - A) + phi(x)
//! dx/dt = p - A,  dp/dt = (dA/dx)^T (p - A) - grad phi.

use crate::error::{Error, Result};
use crate::invariant::{Invariant, InvariantSet};
use crate::state::StateVector;
use crate::system::ConservativeSystem;

const RADIUS_GUARD: f64 = 1e-12;

/// Field configuration for the planar particle benchmarks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldConfig {
    /// B = e_z from A = (-y/2, x/2, 0), attractive potential phi = 1e-2 / R.
    /// Conserves energy and the planar angular momentum L = x p_y - y p_x.
    Uniform,
    /// Axisymmetric tokamak field without inductive electric field (phi = 0).
    /// Conserves energy.
    Tokamak,
}

#[derive(Debug, Clone)]
pub struct ChargedParticle2D {
    field: FieldConfig,
}

impl ChargedParticle2D {
    pub fn new(field: FieldConfig) -> Self {
        Self { field }
    }

    pub fn field(&self) -> FieldConfig {
        self.field
    }

    /// Vector potential A(x).
    pub fn vector_potential(&self, x: &[f64]) -> Result<[f64; 3]> {
        match self.field {
            FieldConfig::Uniform => Ok([-0.5 * x[1], 0.5 * x[0], 0.0]),
            FieldConfig::Tokamak => {
                let (r2, r) = cyl_radius(x)?;
                let u = x[2] / (2.0 * r2);
                let w = ((1.0 - r) * (1.0 - r) + x[2] * x[2]) / (4.0 * r2);
                Ok([u * x[0] - w * x[1], u * x[1] + w * x[0], -0.5 * r.ln()])
            }
        }
    }

    /// Jacobian J[i][j] = dA_i / dx_j.
    fn potential_jacobian(&self, x: &[f64]) -> Result<[[f64; 3]; 3]> {
        match self.field {
            FieldConfig::Uniform => Ok([
                [0.0, -0.5, 0.0],
                [0.5, 0.0, 0.0],
                [0.0, 0.0, 0.0],
            ]),
            FieldConfig::Tokamak => {
                let (r2, r) = cyl_radius(x)?;
                let (xx, yy, zz) = (x[0], x[1], x[2]);
                let u = zz / (2.0 * r2);
                let w = ((1.0 - r) * (1.0 - r) + zz * zz) / (4.0 * r2);
                let du = [-xx * zz / (r2 * r2), -yy * zz / (r2 * r2), 1.0 / (2.0 * r2)];
                let dw_dr = -((1.0 - r) + zz * zz) / (2.0 * r * r * r);
                let dw = [xx / r * dw_dr, yy / r * dw_dr, zz / (2.0 * r2)];
                Ok([
                    [
                        u + xx * du[0] - yy * dw[0],
                        xx * du[1] - w - yy * dw[1],
                        xx * du[2] - yy * dw[2],
                    ],
                    [
                        yy * du[0] + w + xx * dw[0],
                        u + yy * du[1] + xx * dw[1],
                        yy * du[2] + xx * dw[2],
                    ],
                    [-xx / (2.0 * r2), -yy / (2.0 * r2), 0.0],
                ])
            }
        }
    }

    pub fn scalar_potential(&self, x: &[f64]) -> Result<f64> {
        match self.field {
            FieldConfig::Uniform => {
                let (_, r) = cyl_radius(x)?;
                Ok(1e-2 / r)
            }
            FieldConfig::Tokamak => Ok(0.0),
        }
    }

    fn grad_scalar_potential(&self, x: &[f64]) -> Result<[f64; 3]> {
        match self.field {
            FieldConfig::Uniform => {
                let (r2, r) = cyl_radius(x)?;
                let c = -1e-2 / (r2 * r);
                Ok([c * x[0], c * x[1], 0.0])
            }
            FieldConfig::Tokamak => Ok([0.0; 3]),
        }
    }

    /// Magnetic field B = curl A.
    pub fn magnetic_field(&self, x: &[f64]) -> Result<[f64; 3]> {
        match self.field {
            FieldConfig::Uniform => Ok([0.0, 0.0, 1.0]),
            FieldConfig::Tokamak => {
                let (r2, r) = cyl_radius(x)?;
                Ok([
                    -(2.0 * x[1] + x[0] * x[2]) / (2.0 * r2),
                    (2.0 * x[0] - x[1] * x[2]) / (2.0 * r2),
                    (r - 1.0) / (2.0 * r),
                ])
            }
        }
    }

    pub fn hamiltonian(&self, y: &[f64]) -> Result<f64> {
        let a = self.vector_potential(&y[..3])?;
        let v: Vec<f64> = (0..3).map(|k| y[3 + k] - a[k]).collect();
        Ok(0.5 * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]) + self.scalar_potential(&y[..3])?)
    }

    /// Kinetic velocity v = p - A(x).
    pub fn velocity(&self, y: &[f64]) -> Result<[f64; 3]> {
        let a = self.vector_potential(&y[..3])?;
        Ok([y[3] - a[0], y[4] - a[1], y[5] - a[2]])
    }

    fn grad_h(&self, y: &[f64]) -> Result<Vec<f64>> {
        let x = &y[..3];
        let a = self.vector_potential(x)?;
        let jac = self.potential_jacobian(x)?;
        let gphi = self.grad_scalar_potential(x)?;
        let v = [y[3] - a[0], y[4] - a[1], y[5] - a[2]];
        let mut g = vec![0.0; 6];
        for k in 0..3 {
            // dH/dx_k = -(dA/dx_k).v + dphi/dx_k
            g[k] = -(jac[0][k] * v[0] + jac[1][k] * v[1] + jac[2][k] * v[2]) + gphi[k];
            g[3 + k] = v[k];
        }
        Ok(g)
    }
}

fn cyl_radius(x: &[f64]) -> Result<(f64, f64)> {
    let r2 = x[0] * x[0] + x[1] * x[1];
    let r = r2.sqrt();
    if r < RADIUS_GUARD {
        return Err(Error::CollisionSingularity {
            system: "charged particle".into(),
            distance: r,
        });
    }
    Ok((r2, r))
}

impl ConservativeSystem for ChargedParticle2D {
    fn name(&self) -> &str {
        match self.field {
            FieldConfig::Uniform => "particle-uniform",
            FieldConfig::Tokamak => "particle-tokamak",
        }
    }

    fn dim(&self) -> usize {
        6
    }

    fn rhs(&self, y: &[f64]) -> Result<Vec<f64>> {
        let x = &y[..3];
        let a = self.vector_potential(x)?;
        let jac = self.potential_jacobian(x)?;
        let gphi = self.grad_scalar_potential(x)?;
        let v = [y[3] - a[0], y[4] - a[1], y[5] - a[2]];
        let mut out = vec![0.0; 6];
        for k in 0..3 {
            out[k] = v[k];
            out[3 + k] = jac[0][k] * v[0] + jac[1][k] * v[1] + jac[2][k] * v[2] - gphi[k];
        }
        Ok(out)
    }

    fn invariants(&self) -> InvariantSet {
        let me = self.clone();
        let grad_me = self.clone();
        let mut items = vec![Invariant::new(
            "H",
            move |y: &[f64]| me.hamiltonian(y).unwrap_or(f64::NAN),
            move |y: &[f64]| grad_me.grad_h(y).unwrap_or_else(|_| vec![f64::NAN; 6]),
        )];
        if self.field == FieldConfig::Uniform {
            items.push(Invariant::new(
                "L",
                |y: &[f64]| y[0] * y[4] - y[1] * y[3],
                |y: &[f64]| vec![y[4], -y[3], 0.0, -y[1], y[0], 0.0],
            ));
        }
        InvariantSet::new(items, &self.initial_state()).expect("finite reference invariants")
    }

    fn initial_state(&self) -> StateVector {
        let (x, v) = match self.field {
            FieldConfig::Uniform => ([0.0, -1.0, 0.0], [0.1, 0.01, 0.0]),
            FieldConfig::Tokamak => ([1.05, 0.0, 0.0], [0.0, 4.816e-4, -2.059e-3]),
        };
        let a = self
            .vector_potential(&x)
            .expect("initial position away from the axis");
        StateVector::new(vec![
            x[0],
            x[1],
            x[2],
            v[0] + a[0],
            v[1] + a[1],
            v[2] + a[2],
        ])
        .expect("finite initial state")
    }
}
