//! Tiny dense solves for the l x l projection systems (l <= 4 in practice).

use crate::error::{Error, Result};

/// Row-major square matrix of small order.
#[derive(Debug, Clone)]
pub struct SmallMatrix {
    pub n: usize,
    pub a: Vec<f64>,
}

impl SmallMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, a: vec![0.0; n * n] }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.a[i * self.n + j] = v;
    }

    pub fn one_norm(&self) -> f64 {
        (0..self.n)
            .map(|j| (0..self.n).map(|i| self.at(i, j).abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Inverse by Gauss-Jordan with partial pivoting; None when a pivot vanishes.
    pub fn inverse(&self) -> Option<SmallMatrix> {
        let n = self.n;
        let mut m = self.a.clone();
        let mut inv = SmallMatrix::zeros(n);
        for i in 0..n {
            inv.set(i, i, 1.0);
        }
        for col in 0..n {
            let mut piv = col;
            for r in col + 1..n {
                if m[r * n + col].abs() > m[piv * n + col].abs() {
                    piv = r;
                }
            }
            if m[piv * n + col] == 0.0 {
                return None;
            }
            if piv != col {
                for j in 0..n {
                    m.swap(col * n + j, piv * n + j);
                    inv.a.swap(col * n + j, piv * n + j);
                }
            }
            let d = m[col * n + col];
            for j in 0..n {
                m[col * n + j] /= d;
                inv.a[col * n + j] /= d;
            }
            for r in 0..n {
                if r != col {
                    let factor = m[r * n + col];
                    if factor != 0.0 {
                        for j in 0..n {
                            m[r * n + j] -= factor * m[col * n + j];
                            inv.a[r * n + j] -= factor * inv.a[col * n + j];
                        }
                    }
                }
            }
        }
        Some(inv)
    }

    /// 1-norm condition estimate via the explicit inverse (fine for n <= 4).
    pub fn condition_estimate(&self) -> f64 {
        match self.inverse() {
            Some(inv) => self.one_norm() * inv.one_norm(),
            None => f64::INFINITY,
        }
    }

    /// Solve A x = b with the explicit inverse.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let inv = self
            .inverse()
            .ok_or(Error::SingularDirections { cond: f64::INFINITY })?;
        let n = self.n;
        let mut x = vec![0.0; n];
        for i in 0..n {
            let mut s = 0.0;
            for j in 0..n {
                s += inv.at(i, j) * b[j];
            }
            x[i] = s;
        }
        Ok(x)
    }
}
