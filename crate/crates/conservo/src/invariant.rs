//! Invariant bundles: scalar first integrals with gradients and reference values.

use crate::error::{Error, Result};
use crate::state::StateVector;
use std::sync::Arc;

type EvalFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type GradFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// One scalar invariant I(y) with its analytic gradient.
#[derive(Clone)]
pub struct Invariant {
    name: String,
    eval: EvalFn,
    grad: GradFn,
}

impl Invariant {
    pub fn new(
        name: impl Into<String>,
        eval: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        grad: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            eval: Arc::new(eval),
            grad: Arc::new(grad),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn value(&self, y: &[f64]) -> f64 {
        (self.eval)(y)
    }

    pub fn gradient(&self, y: &[f64]) -> Vec<f64> {
        (self.grad)(y)
    }
}

impl std::fmt::Debug for Invariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Invariant").field("name", &self.name).finish()
    }
}

/// Bundle of invariants measured against their values at the reference state,
/// so that `evaluate` returns g(y) = I(y) - I(y0) which vanishes on the manifold.
#[derive(Debug, Clone)]
pub struct InvariantSet {
    dim: usize,
    items: Vec<Invariant>,
    references: Vec<f64>,
}

impl InvariantSet {
    /// Build a set with reference values taken at `y0`.
    pub fn new(items: Vec<Invariant>, y0: &StateVector) -> Result<Self> {
        let mut references = Vec::with_capacity(items.len());
        for inv in &items {
            let v = inv.value(y0.as_slice());
            if !v.is_finite() {
                return Err(Error::NonFiniteInvariant {
                    name: inv.name().into(),
                });
            }
            references.push(v);
        }
        Ok(Self {
            dim: y0.dim(),
            items,
            references,
        })
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn names(&self) -> Vec<&str> {
        self.items.iter().map(|i| i.name()).collect()
    }

    pub fn items(&self) -> &[Invariant] {
        &self.items
    }

    pub fn references(&self) -> &[f64] {
        &self.references
    }

    fn check_dim(&self, y: &[f64]) -> Result<()> {
        if y.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: y.len(),
            });
        }
        Ok(())
    }

    /// Residuals g_i(y) = I_i(y) - I_i(y0).
    pub fn evaluate(&self, y: &StateVector) -> Result<Vec<f64>> {
        self.check_dim(y.as_slice())?;
        let mut out = Vec::with_capacity(self.items.len());
        for (inv, &r) in self.items.iter().zip(&self.references) {
            let v = inv.value(y.as_slice());
            if !v.is_finite() {
                return Err(Error::NonFiniteInvariant {
                    name: inv.name().into(),
                });
            }
            out.push(v - r);
        }
        Ok(out)
    }

    /// Raw invariant values I_i(y), no reference subtraction.
    pub fn values(&self, y: &StateVector) -> Result<Vec<f64>> {
        let res = self.evaluate(y)?;
        Ok(res
            .iter()
            .zip(&self.references)
            .map(|(g, r)| g + r)
            .collect())
    }

    /// Gradient matrix as columns: column i is grad g_i(y), each of length d.
    pub fn gradients(&self, y: &StateVector) -> Result<Vec<Vec<f64>>> {
        self.check_dim(y.as_slice())?;
        let mut cols = Vec::with_capacity(self.items.len());
        for inv in &self.items {
            let g = inv.gradient(y.as_slice());
            debug_assert_eq!(g.len(), self.dim);
            if let Some(idx) = g.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    context: format!("gradient of invariant '{}'", inv.name()),
                    index: idx,
                });
            }
            cols.push(g);
        }
        Ok(cols)
    }

    /// Sub-bundle keeping the named invariants (reference values carried over).
    pub fn select(&self, names: &[&str]) -> Result<InvariantSet> {
        let mut items = Vec::new();
        let mut references = Vec::new();
        for want in names {
            match self.items.iter().position(|i| i.name() == *want) {
                Some(k) => {
                    items.push(self.items[k].clone());
                    references.push(self.references[k]);
                }
                None => {
                    return Err(Error::UnknownInvariant {
                        name: (*want).into(),
                        available: self.names().join(", "),
                    })
                }
            }
        }
        Ok(InvariantSet {
            dim: self.dim,
            items,
            references,
        })
    }
}

/// Central finite difference of a scalar function, used as the gradient oracle.
pub fn central_difference_gradient(
    f: &dyn Fn(&[f64]) -> f64,
    y: &[f64],
    step: f64,
) -> Vec<f64> {
    let mut out = vec![0.0; y.len()];
    let mut work = y.to_vec();
    for i in 0..y.len() {
        let base = y[i];
        work[i] = base + step;
        let fp = f(&work);
        work[i] = base - step;
        let fm = f(&work);
        work[i] = base;
        out[i] = (fp - fm) / (2.0 * step);
    }
    out
}
