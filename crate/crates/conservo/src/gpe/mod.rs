//! Rotating Gross-Pitaevskii equation, Fourier-pseudospectral in space,
//! exposed as a conservative ODE system over the packed real state.
//!
//!   i d/dt psi = (-1/2 Lap_h + V - Omega Lz_h + beta |psi|^2) psi
//!
//! with Lz_h psi = -i (X dy(psi) - Y dx(psi)). Discrete mass and energy are
//! exact first integrals of this semi-discretization and serve as the
//! projected invariants "M" and "E".

mod spectral;

pub use spectral::SpectralOperators;

use crate::error::{Error, Result};
use crate::invariant::{Invariant, InvariantSet};
use crate::state::{devectorize_complex, vectorize_complex, GridShape, StateVector};
use crate::system::ConservativeSystem;
use num_complex::Complex64;
use std::io::{Read, Write};

/// Trap potential V(x, y).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GpePotential {
    Zero,
    /// (gamma_x^2 x^2 + gamma_y^2 y^2) / 2
    Harmonic { gamma_x: f64, gamma_y: f64 },
}

impl GpePotential {
    fn eval(&self, x: f64, y: f64) -> f64 {
        match self {
            GpePotential::Zero => 0.0,
            GpePotential::Harmonic { gamma_x, gamma_y } => {
                0.5 * (gamma_x * gamma_x * x * x + gamma_y * gamma_y * y * y)
            }
        }
    }
}

/// Discretization parameters for the periodic box [ax, bx) x [ay, by).
#[derive(Debug, Clone)]
pub struct GpeConfig {
    pub domain: [f64; 4],
    pub nx: usize,
    pub ny: usize,
    pub beta: f64,
    pub omega: f64,
    pub potential: GpePotential,
}

impl GpeConfig {
    pub fn validate(&self) -> Result<()> {
        let [ax, bx, ay, by] = self.domain;
        if bx <= ax || by <= ay {
            return Err(Error::InvalidArgument("empty spatial domain".into()));
        }
        for n in [self.nx, self.ny] {
            if n < 8 || n % 2 != 0 {
                return Err(Error::InvalidArgument(format!(
                    "grid extents must be even and >= 8, got {n}"
                )));
            }
        }
        Ok(())
    }
}

/// The semi-discrete GPE with a fixed initial wave function.
#[derive(Debug, Clone)]
pub struct GpeSystem {
    name: String,
    cfg: GpeConfig,
    ops: SpectralOperators,
    v_grid: Vec<f64>,
    psi0: Vec<Complex64>,
    /// Plane-wave dispersion (kappa1, kappa2, amplitude) when the analytic
    /// solution applies (V = 0, Omega = 0).
    plane_wave: Option<(f64, f64, f64)>,
}

impl GpeSystem {
    fn build(name: String, cfg: GpeConfig, psi0: Vec<Complex64>) -> Result<Self> {
        cfg.validate()?;
        let ops = SpectralOperators::new(cfg.nx, cfg.ny, cfg.domain);
        if psi0.len() != ops.grid_len() {
            return Err(Error::ShapeMismatch {
                shape_len: ops.grid_len(),
                state_len: psi0.len(),
            });
        }
        let mut v_grid = vec![0.0; ops.grid_len()];
        for k in 0..cfg.ny {
            for j in 0..cfg.nx {
                v_grid[j + cfg.nx * k] = cfg.potential.eval(ops.x[j], ops.y[k]);
            }
        }
        Ok(Self {
            name,
            cfg,
            ops,
            v_grid,
            psi0,
            plane_wave: None,
        })
    }

    /// psi0 = A exp(i (k1 x + k2 y)). With V = 0 and Omega = 0 this is the
    /// exact single-mode solution psi(t) = psi0 exp(-i w t),
    /// w = (k1^2 + k2^2)/2 + beta A^2.
    pub fn plane_wave(cfg: GpeConfig, amplitude: f64, kappa: [f64; 2]) -> Result<Self> {
        cfg.validate()?;
        let ops = SpectralOperators::new(cfg.nx, cfg.ny, cfg.domain);
        let mut psi0 = vec![Complex64::default(); ops.grid_len()];
        for k in 0..cfg.ny {
            for j in 0..cfg.nx {
                let phase = kappa[0] * ops.x[j] + kappa[1] * ops.y[k];
                psi0[j + cfg.nx * k] = amplitude * Complex64::new(phase.cos(), phase.sin());
            }
        }
        let analytic = cfg.potential == GpePotential::Zero && cfg.omega == 0.0;
        let mut sys = Self::build("gpe-plane".into(), cfg, psi0)?;
        if analytic {
            sys.plane_wave = Some((kappa[0], kappa[1], amplitude));
        }
        Ok(sys)
    }

    /// psi0 proportional to (x + i y) exp(-8 (x^2 + y^2)), normalized to unit
    /// discrete mass. A localized vortex used for trap dynamics.
    pub fn gaussian_vortex(cfg: GpeConfig) -> Result<Self> {
        cfg.validate()?;
        let ops = SpectralOperators::new(cfg.nx, cfg.ny, cfg.domain);
        let c = 2.0 / std::f64::consts::PI.sqrt();
        let mut psi0 = vec![Complex64::default(); ops.grid_len()];
        for k in 0..cfg.ny {
            for j in 0..cfg.nx {
                let (x, y) = (ops.x[j], ops.y[k]);
                let env = c * (-8.0 * (x * x + y * y)).exp();
                psi0[j + cfg.nx * k] = Complex64::new(env * x, env * y);
            }
        }
        let mass: f64 = ops.hx * ops.hy * psi0.iter().map(|z| z.norm_sqr()).sum::<f64>();
        let scale = 1.0 / mass.sqrt();
        for z in psi0.iter_mut() {
            *z *= scale;
        }
        Self::build("gpe-vortex".into(), cfg, psi0)
    }

    /// Arbitrary initial grid, column-major with x fastest.
    pub fn with_initial(name: &str, cfg: GpeConfig, psi0: Vec<Complex64>) -> Result<Self> {
        Self::build(name.into(), cfg, psi0)
    }

    pub fn config(&self) -> &GpeConfig {
        &self.cfg
    }

    pub fn operators(&self) -> &SpectralOperators {
        &self.ops
    }

    pub fn shape(&self) -> GridShape {
        GridShape::new(vec![self.cfg.nx, self.cfg.ny], true).expect("validated extents")
    }

    fn cell_area(&self) -> f64 {
        self.ops.hx * self.ops.hy
    }

    /// w = (-1/2 Lap + V - Omega Lz + beta |psi|^2) psi; the rhs is -i w and
    /// the energy gradient is 2 hx hy w in the packed real coordinates.
    pub fn action(&self, psi: &[Complex64]) -> Vec<Complex64> {
        let lap = self.ops.laplacian(psi);
        let mut out: Vec<Complex64> = psi
            .iter()
            .zip(lap.iter())
            .zip(self.v_grid.iter())
            .map(|((&p, &l), &v)| -0.5 * l + v * p + self.cfg.beta * p.norm_sqr() * p)
            .collect();
        if self.cfg.omega != 0.0 {
            let dx = self.ops.deriv_x(psi);
            let dy = self.ops.deriv_y(psi);
            let nx = self.cfg.nx;
            for k in 0..self.cfg.ny {
                for j in 0..nx {
                    let i = j + nx * k;
                    let lz = -Complex64::i() * (self.ops.x[j] * dy[i] - self.ops.y[k] * dx[i]);
                    out[i] -= self.cfg.omega * lz;
                }
            }
        }
        out
    }

    /// Semi-discrete right-hand side d psi / dt = -i w(psi).
    pub fn rhs_grid(&self, psi: &[Complex64]) -> Vec<Complex64> {
        self.action(psi)
            .into_iter()
            .map(|w| -Complex64::i() * w)
            .collect()
    }

    /// Discrete mass hx hy sum |psi|^2.
    pub fn mass(&self, psi: &[Complex64]) -> f64 {
        self.cell_area() * psi.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }

    /// Discrete energy
    /// 1/2 |grad psi|^2 + (V, |psi|^2) - Omega (Lz psi, psi) + beta/2 sum h |psi|^4,
    /// with |grad psi|^2 = -(Lap psi, psi) and the rotation term taken as the
    /// real part of the inner product.
    pub fn energy(&self, psi: &[Complex64]) -> f64 {
        let area = self.cell_area();
        let lap = self.ops.laplacian(psi);
        let mut kinetic = 0.0;
        for (l, p) in lap.iter().zip(psi) {
            kinetic += (l * p.conj()).re;
        }
        kinetic *= -0.5 * area;
        let mut potential = 0.0;
        let mut quartic = 0.0;
        for (p, v) in psi.iter().zip(&self.v_grid) {
            let d = p.norm_sqr();
            potential += v * d;
            quartic += d * d;
        }
        potential *= area;
        quartic *= 0.5 * self.cfg.beta * area;
        let mut rotation = 0.0;
        if self.cfg.omega != 0.0 {
            let dx = self.ops.deriv_x(psi);
            let dy = self.ops.deriv_y(psi);
            let nx = self.cfg.nx;
            for k in 0..self.cfg.ny {
                for j in 0..nx {
                    let i = j + nx * k;
                    let lz = -Complex64::i() * (self.ops.x[j] * dy[i] - self.ops.y[k] * dx[i]);
                    rotation += (lz * psi[i].conj()).re;
                }
            }
            rotation *= -self.cfg.omega * area;
        }
        kinetic + potential + quartic + rotation
    }

    fn unpack(&self, y: &[f64]) -> Vec<Complex64> {
        let n = self.ops.grid_len();
        debug_assert_eq!(y.len(), 2 * n);
        let (re, im) = y.split_at(n);
        re.iter()
            .zip(im)
            .map(|(&a, &b)| Complex64::new(a, b))
            .collect()
    }

    /// Exact plane-wave solution in packed real coordinates, when available.
    pub fn exact_plane_wave(&self, t: f64) -> Option<Vec<f64>> {
        let (k1, k2, amp) = self.plane_wave?;
        let w = 0.5 * (k1 * k1 + k2 * k2) + self.cfg.beta * amp * amp;
        let rot = Complex64::new(0.0, -w * t).exp();
        let grid: Vec<Complex64> = self.psi0.iter().map(|z| z * rot).collect();
        Some(
            vectorize_complex(&grid, &self.shape())
                .expect("plane wave is finite")
                .into_vec(),
        )
    }
}

fn pack(grid: &[Complex64]) -> Vec<f64> {
    let n = grid.len();
    let mut out = vec![0.0; 2 * n];
    for (i, z) in grid.iter().enumerate() {
        out[i] = z.re;
        out[n + i] = z.im;
    }
    out
}

impl ConservativeSystem for GpeSystem {
    fn name(&self) -> &str {
        &self.name
    }

    fn dim(&self) -> usize {
        2 * self.ops.grid_len()
    }

    fn rhs(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: y.len(),
            });
        }
        Ok(pack(&self.rhs_grid(&self.unpack(y))))
    }

    fn invariants(&self) -> InvariantSet {
        let me = self.clone();
        let mass = Invariant::new(
            "M",
            {
                let me = self.clone();
                move |y: &[f64]| me.mass(&me.unpack(y))
            },
            {
                let area2 = 2.0 * self.cell_area();
                move |y: &[f64]| y.iter().map(|v| area2 * v).collect()
            },
        );
        let energy = Invariant::new(
            "E",
            {
                let me = self.clone();
                move |y: &[f64]| me.energy(&me.unpack(y))
            },
            move |y: &[f64]| {
                let w = me.action(&me.unpack(y));
                let mut g = pack(&w);
                let area2 = 2.0 * me.cell_area();
                for v in g.iter_mut() {
                    *v *= area2;
                }
                g
            },
        );
        InvariantSet::new(vec![mass, energy], &self.initial_state())
            .expect("finite reference invariants")
    }

    fn initial_state(&self) -> StateVector {
        vectorize_complex(&self.psi0, &self.shape()).expect("finite initial grid")
    }

    fn exact_solution(&self, t: f64) -> Option<Vec<f64>> {
        self.exact_plane_wave(t)
    }

    fn grid_shape(&self) -> Option<GridShape> {
        Some(self.shape())
    }
}

const SNAPSHOT_MAGIC: &[u8; 8] = b"CONSNAP1";

/// Write a field snapshot: magic, rank, extents, time, then row-major
/// (re, im) float64 pairs, all little-endian.
pub fn write_snapshot<W: Write>(
    mut out: W,
    state: &StateVector,
    shape: &GridShape,
    time: f64,
) -> Result<()> {
    let grid = devectorize_complex(state, shape)?;
    out.write_all(SNAPSHOT_MAGIC)?;
    out.write_all(&(shape.rank() as u32).to_le_bytes())?;
    for &e in shape.extents() {
        out.write_all(&(e as u32).to_le_bytes())?;
    }
    out.write_all(&time.to_le_bytes())?;
    let (nx, ny) = (shape.extents()[0], shape.extents()[1]);
    for j in 0..nx {
        for k in 0..ny {
            let z = grid[j + nx * k];
            out.write_all(&z.re.to_le_bytes())?;
            out.write_all(&z.im.to_le_bytes())?;
        }
    }
    Ok(())
}

/// Read back a 2D snapshot written by `write_snapshot`.
pub fn read_snapshot<R: Read>(mut input: R) -> Result<(StateVector, GridShape, f64)> {
    let bad = |m: &str| Error::InvalidArgument(format!("snapshot: {m}"));
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic)?;
    if &magic != SNAPSHOT_MAGIC {
        return Err(bad("bad magic"));
    }
    let mut u32buf = [0u8; 4];
    input.read_exact(&mut u32buf)?;
    let rank = u32::from_le_bytes(u32buf) as usize;
    if rank != 2 {
        return Err(bad("only rank-2 snapshots supported"));
    }
    let mut extents = Vec::with_capacity(rank);
    for _ in 0..rank {
        input.read_exact(&mut u32buf)?;
        extents.push(u32::from_le_bytes(u32buf) as usize);
    }
    let mut f64buf = [0u8; 8];
    input.read_exact(&mut f64buf)?;
    let time = f64::from_le_bytes(f64buf);
    let shape = GridShape::new(extents.clone(), true)?;
    let (nx, ny) = (extents[0], extents[1]);
    let mut grid = vec![Complex64::default(); nx * ny];
    for j in 0..nx {
        for k in 0..ny {
            input.read_exact(&mut f64buf)?;
            let re = f64::from_le_bytes(f64buf);
            input.read_exact(&mut f64buf)?;
            let im = f64::from_le_bytes(f64buf);
            grid[j + nx * k] = Complex64::new(re, im);
        }
    }
    Ok((vectorize_complex(&grid, &shape)?, shape, time))
}
