//! Explicit Runge-Kutta tableaux and the one-step map.

use crate::error::{Error, Result};
use crate::state::StateVector;
use crate::system::ConservativeSystem;

/// Coefficients (A, b, c) of an explicit Runge-Kutta method of classical order p.
#[derive(Debug, Clone)]
pub struct ButcherTableau {
    pub name: String,
    /// Strictly lower-triangular stage matrix, row-major s x s.
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub order: usize,
}

impl ButcherTableau {
    pub fn stages(&self) -> usize {
        self.b.len()
    }

    /// Structural checks: explicitness, consistency, row-sum condition.
    pub fn validate(&self) -> Result<()> {
        let s = self.stages();
        if self.a.len() != s || self.c.len() != s {
            return Err(Error::InvalidArgument("ragged tableau".into()));
        }
        for (i, row) in self.a.iter().enumerate() {
            if row.len() != s {
                return Err(Error::InvalidArgument("ragged tableau row".into()));
            }
            for (j, &v) in row.iter().enumerate() {
                if j >= i && v != 0.0 {
                    return Err(Error::InvalidArgument(format!(
                        "tableau not explicit: A[{i}][{j}] = {v}"
                    )));
                }
            }
        }
        let sum_b: f64 = self.b.iter().sum();
        if (sum_b - 1.0).abs() > 1e-15 {
            return Err(Error::InvalidArgument(format!(
                "weights do not sum to 1: {sum_b}"
            )));
        }
        for i in 0..s {
            let row_sum: f64 = self.a[i].iter().sum();
            if (row_sum - self.c[i]).abs() > 1e-15 {
                return Err(Error::InvalidArgument(format!(
                    "row-sum condition violated at stage {i}"
                )));
            }
        }
        Ok(())
    }

    /// Largest residual among the order conditions up to `self.order`.
    pub fn order_condition_defect(&self) -> f64 {
        order_condition_defect(self, self.order)
    }
}

/// Named methods used throughout: RK1..RK4 are the classic explicit methods,
/// RK5 is the 6-stage fifth-order Fehlberg weight row.
pub fn tableau(name: &str) -> Result<ButcherTableau> {
    let t = match name {
        "RK1" => ButcherTableau {
            name: "RK1".into(),
            a: vec![vec![0.0]],
            b: vec![1.0],
            c: vec![0.0],
            order: 1,
        },
        "RK2" => ButcherTableau {
            name: "RK2".into(),
            a: vec![vec![0.0, 0.0], vec![0.5, 0.0]],
            b: vec![0.0, 1.0],
            c: vec![0.0, 0.5],
            order: 2,
        },
        "RK3" => ButcherTableau {
            name: "RK3".into(),
            a: vec![
                vec![0.0, 0.0, 0.0],
                vec![1.0 / 3.0, 0.0, 0.0],
                vec![0.0, 2.0 / 3.0, 0.0],
            ],
            b: vec![0.25, 0.0, 0.75],
            c: vec![0.0, 1.0 / 3.0, 2.0 / 3.0],
            order: 3,
        },
        "RK4" => ButcherTableau {
            name: "RK4".into(),
            a: vec![
                vec![0.0, 0.0, 0.0, 0.0],
                vec![0.5, 0.0, 0.0, 0.0],
                vec![0.0, 0.5, 0.0, 0.0],
                vec![0.0, 0.0, 1.0, 0.0],
            ],
            b: vec![1.0 / 6.0, 2.0 / 6.0, 2.0 / 6.0, 1.0 / 6.0],
            c: vec![0.0, 0.5, 0.5, 1.0],
            order: 4,
        },
        "RK5" => ButcherTableau {
            name: "RK5".into(),
            a: vec![
                vec![0.0; 6],
                vec![0.25, 0.0, 0.0, 0.0, 0.0, 0.0],
                vec![3.0 / 32.0, 9.0 / 32.0, 0.0, 0.0, 0.0, 0.0],
                vec![
                    1932.0 / 2197.0,
                    -7200.0 / 2197.0,
                    7296.0 / 2197.0,
                    0.0,
                    0.0,
                    0.0,
                ],
                vec![439.0 / 216.0, -8.0, 3680.0 / 513.0, -845.0 / 4104.0, 0.0, 0.0],
                vec![
                    -8.0 / 27.0,
                    2.0,
                    -3544.0 / 2565.0,
                    1859.0 / 4104.0,
                    -11.0 / 40.0,
                    0.0,
                ],
            ],
            b: vec![
                16.0 / 135.0,
                0.0,
                6656.0 / 12825.0,
                28561.0 / 56430.0,
                -9.0 / 50.0,
                2.0 / 55.0,
            ],
            c: vec![0.0, 0.25, 3.0 / 8.0, 12.0 / 13.0, 1.0, 0.5],
            order: 5,
        },
        other => {
            return Err(Error::UnknownTableau {
                name: other.into(),
            })
        }
    };
    debug_assert!(t.validate().is_ok());
    Ok(t)
}

pub const TABLEAU_NAMES: [&str; 5] = ["RK1", "RK2", "RK3", "RK4", "RK5"];

/// Worst residual of the rooted-tree order conditions up to `order` (<= 5).
pub fn order_condition_defect(tab: &ButcherTableau, order: usize) -> f64 {
    let s = tab.stages();
    let a = &tab.a;
    let b = &tab.b;
    let c = &tab.c;

    // elementary-weight building blocks
    let apply = |v: &[f64]| -> Vec<f64> {
        (0..s)
            .map(|i| (0..s).map(|j| a[i][j] * v[j]).sum())
            .collect()
    };
    let had = |u: &[f64], v: &[f64]| -> Vec<f64> { u.iter().zip(v).map(|(x, y)| x * y).collect() };
    let wsum = |v: &[f64]| -> f64 { b.iter().zip(v).map(|(x, y)| x * y).sum() };

    let ones = vec![1.0; s];
    let c1 = c.clone();
    let c2 = had(&c1, &c1);
    let c3 = had(&c2, &c1);
    let c4 = had(&c3, &c1);
    let ac = apply(&c1);
    let ac2 = apply(&c2);
    let ac3 = apply(&c3);
    let aac = apply(&ac);
    let a_c_ac = apply(&had(&c1, &ac));
    let aac2 = apply(&ac2);
    let aaac = apply(&aac);

    let mut conditions: Vec<(usize, f64, f64)> = vec![(1, wsum(&ones), 1.0)];
    conditions.push((2, wsum(&c1), 1.0 / 2.0));
    conditions.push((3, wsum(&c2), 1.0 / 3.0));
    conditions.push((3, wsum(&ac), 1.0 / 6.0));
    conditions.push((4, wsum(&c3), 1.0 / 4.0));
    conditions.push((4, wsum(&had(&c1, &ac)), 1.0 / 8.0));
    conditions.push((4, wsum(&ac2), 1.0 / 12.0));
    conditions.push((4, wsum(&aac), 1.0 / 24.0));
    conditions.push((5, wsum(&c4), 1.0 / 5.0));
    conditions.push((5, wsum(&had(&c2, &ac)), 1.0 / 10.0));
    conditions.push((5, wsum(&had(&ac, &ac)), 1.0 / 20.0));
    conditions.push((5, wsum(&had(&c1, &ac2)), 1.0 / 15.0));
    conditions.push((5, wsum(&had(&c1, &aac)), 1.0 / 30.0));
    conditions.push((5, wsum(&ac3), 1.0 / 20.0));
    conditions.push((5, wsum(&a_c_ac), 1.0 / 40.0));
    conditions.push((5, wsum(&aac2), 1.0 / 60.0));
    conditions.push((5, wsum(&aaac), 1.0 / 120.0));

    conditions
        .iter()
        .filter(|(p, _, _)| *p <= order)
        .map(|(_, got, want)| (got - want).abs())
        .fold(0.0, f64::max)
}

/// One explicit RK step y -> y + h * sum b_i k_i.
pub fn rk_step_f<F>(f: F, y: &StateVector, h: f64, tab: &ButcherTableau) -> Result<StateVector>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    if h <= 0.0 {
        return Err(Error::InvalidArgument(format!("step size must be > 0, got {h}")));
    }
    let d = y.dim();
    let s = tab.stages();
    let mut k: Vec<Vec<f64>> = Vec::with_capacity(s);
    let mut stage_y = vec![0.0; d];
    for i in 0..s {
        stage_y.copy_from_slice(y.as_slice());
        for (j, kj) in k.iter().enumerate() {
            let aij = tab.a[i][j];
            if aij != 0.0 {
                let w = h * aij;
                for (sy, kv) in stage_y.iter_mut().zip(kj) {
                    *sy += w * kv;
                }
            }
        }
        let ki = f(&stage_y)?;
        if ki.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteStage { stage: i });
        }
        k.push(ki);
    }
    let mut out = y.as_slice().to_vec();
    for (i, ki) in k.iter().enumerate() {
        let bi = tab.b[i];
        if bi != 0.0 {
            let w = h * bi;
            for (o, kv) in out.iter_mut().zip(ki) {
                *o += w * kv;
            }
        }
    }
    StateVector::new(out)
}

/// One explicit RK step of a conservative system.
pub fn rk_step(
    sys: &dyn ConservativeSystem,
    y: &StateVector,
    h: f64,
    tab: &ButcherTableau,
) -> Result<StateVector> {
    rk_step_f(|v| sys.rhs(v), y, h, tab)
}
