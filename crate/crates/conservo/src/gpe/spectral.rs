//! Fourier spectral differentiation on a periodic 2D grid.
//!
//! Grids are stored column-major with the x index fastest: entry (j, k) of a
//! J x K grid lives at j + J*k, matching the crate-wide vectorization
//! convention. First derivatives zero the Nyquist mode, which keeps the
//! operator skew-symmetric; second derivatives keep the full -k^2 symbol.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

#[derive(Clone)]
pub struct SpectralOperators {
    nx: usize,
    ny: usize,
    fwd_x: Arc<dyn Fft<f64>>,
    inv_x: Arc<dyn Fft<f64>>,
    fwd_y: Arc<dyn Fft<f64>>,
    inv_y: Arc<dyn Fft<f64>>,
    /// Wavenumbers along x in FFT order (Nyquist kept), premultiplied 2 pi / L.
    pub kx: Vec<f64>,
    pub ky: Vec<f64>,
    /// First-derivative wavenumbers (Nyquist zeroed).
    pub kx1: Vec<f64>,
    pub ky1: Vec<f64>,
    /// Grid coordinates.
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub hx: f64,
    pub hy: f64,
}

impl std::fmt::Debug for SpectralOperators {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralOperators")
            .field("nx", &self.nx)
            .field("ny", &self.ny)
            .finish()
    }
}

fn wavenumbers(n: usize, length: f64) -> (Vec<f64>, Vec<f64>) {
    let base = 2.0 * std::f64::consts::PI / length;
    let mut full = vec![0.0; n];
    let mut first = vec![0.0; n];
    for (m, slot) in full.iter_mut().enumerate() {
        let signed = if m <= n / 2 { m as isize } else { m as isize - n as isize };
        *slot = base * signed as f64;
    }
    for m in 0..n {
        first[m] = if n % 2 == 0 && m == n / 2 { 0.0 } else { full[m] };
    }
    (full, first)
}

impl SpectralOperators {
    pub fn new(nx: usize, ny: usize, domain: [f64; 4]) -> Self {
        let [ax, bx, ay, by] = domain;
        let lx = bx - ax;
        let ly = by - ay;
        let mut planner = FftPlanner::new();
        let (kx, kx1) = wavenumbers(nx, lx);
        let (ky, ky1) = wavenumbers(ny, ly);
        let hx = lx / nx as f64;
        let hy = ly / ny as f64;
        Self {
            nx,
            ny,
            fwd_x: planner.plan_fft_forward(nx),
            inv_x: planner.plan_fft_inverse(nx),
            fwd_y: planner.plan_fft_forward(ny),
            inv_y: planner.plan_fft_inverse(ny),
            kx,
            ky,
            kx1,
            ky1,
            x: (0..nx).map(|j| ax + j as f64 * hx).collect(),
            y: (0..ny).map(|k| ay + k as f64 * hy).collect(),
            hx,
            hy,
        }
    }

    pub fn grid_len(&self) -> usize {
        self.nx * self.ny
    }

    fn fft_x(&self, data: &mut [Complex64], inverse: bool) {
        let plan = if inverse { &self.inv_x } else { &self.fwd_x };
        for col in data.chunks_exact_mut(self.nx) {
            plan.process(col);
        }
        if inverse {
            let scale = 1.0 / self.nx as f64;
            for v in data.iter_mut() {
                *v *= scale;
            }
        }
    }

    fn fft_y(&self, data: &mut [Complex64], inverse: bool) {
        let plan = if inverse { &self.inv_y } else { &self.fwd_y };
        let mut line = vec![Complex64::default(); self.ny];
        for j in 0..self.nx {
            for k in 0..self.ny {
                line[k] = data[j + self.nx * k];
            }
            plan.process(&mut line);
            for k in 0..self.ny {
                data[j + self.nx * k] = line[k];
            }
        }
        if inverse {
            let scale = 1.0 / self.ny as f64;
            for v in data.iter_mut() {
                *v *= scale;
            }
        }
    }

    /// Laplacian via the full 2D transform.
    pub fn laplacian(&self, psi: &[Complex64]) -> Vec<Complex64> {
        let mut work = psi.to_vec();
        self.fft_x(&mut work, false);
        self.fft_y(&mut work, false);
        for k in 0..self.ny {
            let ky2 = self.ky[k] * self.ky[k];
            for j in 0..self.nx {
                let sym = -(self.kx[j] * self.kx[j] + ky2);
                work[j + self.nx * k] *= sym;
            }
        }
        self.fft_y(&mut work, true);
        self.fft_x(&mut work, true);
        work
    }

    /// d/dx with the Nyquist mode removed.
    pub fn deriv_x(&self, psi: &[Complex64]) -> Vec<Complex64> {
        let mut work = psi.to_vec();
        self.fft_x(&mut work, false);
        for k in 0..self.ny {
            for j in 0..self.nx {
                work[j + self.nx * k] *= Complex64::new(0.0, self.kx1[j]);
            }
        }
        self.fft_x(&mut work, true);
        work
    }

    /// d/dy with the Nyquist mode removed.
    pub fn deriv_y(&self, psi: &[Complex64]) -> Vec<Complex64> {
        let mut work = psi.to_vec();
        self.fft_y(&mut work, false);
        for k in 0..self.ny {
            let ik = Complex64::new(0.0, self.ky1[k]);
            for j in 0..self.nx {
                work[j + self.nx * k] *= ik;
            }
        }
        self.fft_y(&mut work, true);
        work
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn plane(ops: &SpectralOperators, m1: f64, m2: f64) -> Vec<Complex64> {
        let mut out = vec![Complex64::default(); ops.grid_len()];
        for k in 0..ops.ny {
            for j in 0..ops.nx {
                let phase = m1 * ops.x[j] + m2 * ops.y[k];
                out[j + ops.nx * k] = Complex64::new(phase.cos(), phase.sin());
            }
        }
        out
    }

    #[test]
    fn second_derivative_eigenfunction() {
        let ops = SpectralOperators::new(16, 16, [0.0, 2.0 * PI, 0.0, 2.0 * PI]);
        for (m1, m2) in [(1.0, 0.0), (3.0, 2.0), (5.0, 7.0)] {
            let psi = plane(&ops, m1, m2);
            let lap = ops.laplacian(&psi);
            let expect = -(m1 * m1 + m2 * m2);
            for (l, p) in lap.iter().zip(&psi) {
                assert!(
                    (l - expect * p).norm() <= 1e-12 * expect.abs().max(1.0),
                    "mode ({m1},{m2})"
                );
            }
        }
    }

    #[test]
    fn first_derivative_of_constant_vanishes() {
        let ops = SpectralOperators::new(16, 8, [-1.0, 3.0, 0.0, 1.0]);
        let psi = vec![Complex64::new(2.5, -0.5); ops.grid_len()];
        for v in ops.deriv_x(&psi).iter().chain(ops.deriv_y(&psi).iter()) {
            assert!(v.norm() <= 1e-12);
        }
    }

    #[test]
    fn first_derivative_eigenfunction() {
        let ops = SpectralOperators::new(32, 32, [0.0, 2.0 * PI, 0.0, 2.0 * PI]);
        let psi = plane(&ops, 4.0, -3.0);
        let dx = ops.deriv_x(&psi);
        let dy = ops.deriv_y(&psi);
        for i in 0..psi.len() {
            assert!((dx[i] - Complex64::i() * 4.0 * psi[i]).norm() <= 1e-11);
            assert!((dy[i] + Complex64::i() * 3.0 * psi[i]).norm() <= 1e-11);
        }
    }

    /// Closed-form periodic spectral differentiation matrices (even N),
    /// used as an independent oracle for the FFT path.
    fn dense_d1(n: usize, length: f64) -> Vec<Vec<f64>> {
        let h = 2.0 * PI / n as f64;
        let scale = 2.0 * PI / length;
        let mut d = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let s = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                    let arg = (i as f64 - j as f64) * h / 2.0;
                    d[i][j] = scale * 0.5 * s * (arg.cos() / arg.sin());
                }
            }
        }
        d
    }

    fn dense_d2(n: usize, length: f64) -> Vec<Vec<f64>> {
        let h = 2.0 * PI / n as f64;
        let scale = (2.0 * PI / length).powi(2);
        let mut d = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                d[i][j] = if i == j {
                    scale * (-PI * PI / (3.0 * h * h) - 1.0 / 6.0)
                } else {
                    let s = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                    let arg = (i as f64 - j as f64) * h / 2.0;
                    scale * (-s / (2.0 * arg.sin().powi(2)))
                };
            }
        }
        d
    }

    #[test]
    fn fft_path_matches_dense_matrices_on_8x8() {
        use rand::{Rng, SeedableRng};
        let n = 8;
        let ops = SpectralOperators::new(n, n, [0.0, 4.0, -1.0, 1.0]);
        let d1x = dense_d1(n, 4.0);
        let d2x = dense_d2(n, 4.0);
        let d1y = dense_d1(n, 2.0);
        let d2y = dense_d2(n, 2.0);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let psi: Vec<Complex64> = (0..n * n)
            .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect();
        let dx = ops.deriv_x(&psi);
        let dy = ops.deriv_y(&psi);
        let lap = ops.laplacian(&psi);
        for k in 0..n {
            for j in 0..n {
                let mut sx = Complex64::default();
                let mut sxx = Complex64::default();
                for m in 0..n {
                    sx += d1x[j][m] * psi[m + n * k];
                    sxx += d2x[j][m] * psi[m + n * k];
                }
                let mut sy = Complex64::default();
                let mut syy = Complex64::default();
                for m in 0..n {
                    sy += d1y[k][m] * psi[j + n * m];
                    syy += d2y[k][m] * psi[j + n * m];
                }
                let i = j + n * k;
                assert!((dx[i] - sx).norm() <= 1e-12 * (1.0 + sx.norm()));
                assert!((dy[i] - sy).norm() <= 1e-12 * (1.0 + sy.norm()));
                assert!((lap[i] - (sxx + syy)).norm() <= 1e-11 * (1.0 + (sxx + syy).norm()));
            }
        }
    }
}
