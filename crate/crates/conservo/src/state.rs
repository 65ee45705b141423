//! Flat real state vectors and the grid vectorization convention.
//!
//! Every integrator in this crate works on a flat `StateVector` of `f64`.
//! Complex PDE grids are packed into real vectors with all real parts first,
//! then all imaginary parts, each block in column-major grid order with the
//! x index fastest.

use crate::error::{Error, Result};
use num_complex::Complex64;

/// Flat real-valued state of fixed dimension. Entries are finite by
/// construction; integrators re-validate after every accepted step.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    values: Vec<f64>,
}

impl StateVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    context: "StateVector".into(),
                    index: i,
                });
            }
        }
        Ok(Self { values })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }
}

impl std::ops::Index<usize> for StateVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}

/// Shape of a structured grid backing a `StateVector`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridShape {
    extents: Vec<usize>,
    complex: bool,
}

impl GridShape {
    pub fn new(extents: Vec<usize>, complex: bool) -> Result<Self> {
        if extents.is_empty() || extents.len() > 3 {
            return Err(Error::InvalidArgument(format!(
                "grid rank must be 1, 2, or 3, got {}",
                extents.len()
            )));
        }
        if extents.iter().any(|&e| e == 0) {
            return Err(Error::InvalidArgument("zero grid extent".into()));
        }
        Ok(Self { extents, complex })
    }

    pub fn rank(&self) -> usize {
        self.extents.len()
    }

    pub fn extents(&self) -> &[usize] {
        &self.extents
    }

    pub fn is_complex(&self) -> bool {
        self.complex
    }

    /// Number of grid points.
    pub fn points(&self) -> usize {
        self.extents.iter().product()
    }

    /// Length of the flat real vector holding this grid.
    pub fn state_len(&self) -> usize {
        self.points() * if self.complex { 2 } else { 1 }
    }

    fn check(&self, state_len: usize) -> Result<()> {
        if state_len != self.state_len() {
            return Err(Error::ShapeMismatch {
                shape_len: self.state_len(),
                state_len,
            });
        }
        Ok(())
    }
}

/// Flatten a real grid, column-major (first/x index fastest).
///
/// `grid[i]` must be the i-th grid value in that same order already; this is
/// the identity on data and exists so call sites state their intent against
/// a shape check.
pub fn vectorize_real(grid: &[f64], shape: &GridShape) -> Result<StateVector> {
    if shape.is_complex() {
        return Err(Error::InvalidArgument(
            "vectorize_real on a complex shape".into(),
        ));
    }
    shape.check(grid.len())?;
    StateVector::new(grid.to_vec())
}

pub fn devectorize_real(state: &StateVector, shape: &GridShape) -> Result<Vec<f64>> {
    if shape.is_complex() {
        return Err(Error::InvalidArgument(
            "devectorize_real on a complex shape".into(),
        ));
    }
    shape.check(state.dim())?;
    Ok(state.as_slice().to_vec())
}

/// Pack a complex grid (column-major, x fastest) as [all re; all im].
pub fn vectorize_complex(grid: &[Complex64], shape: &GridShape) -> Result<StateVector> {
    if !shape.is_complex() {
        return Err(Error::InvalidArgument(
            "vectorize_complex on a real shape".into(),
        ));
    }
    if grid.len() != shape.points() {
        return Err(Error::ShapeMismatch {
            shape_len: shape.points(),
            state_len: grid.len(),
        });
    }
    let n = grid.len();
    let mut values = vec![0.0; 2 * n];
    for (i, z) in grid.iter().enumerate() {
        values[i] = z.re;
        values[n + i] = z.im;
    }
    StateVector::new(values)
}

pub fn devectorize_complex(state: &StateVector, shape: &GridShape) -> Result<Vec<Complex64>> {
    if !shape.is_complex() {
        return Err(Error::InvalidArgument(
            "devectorize_complex on a real shape".into(),
        ));
    }
    shape.check(state.dim())?;
    let n = shape.points();
    let v = state.as_slice();
    Ok((0..n).map(|i| Complex64::new(v[i], v[n + i])).collect())
}

/// View the [re; im] blocks of a packed complex state without copying.
pub fn split_complex(values: &[f64]) -> (&[f64], &[f64]) {
    let n = values.len() / 2;
    values.split_at(n)
}
