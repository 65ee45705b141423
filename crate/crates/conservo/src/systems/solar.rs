//! Ten-body solar system in SI units: Sun, eight planets, and Pluto.
//!
//! State layout: 30 position components then 30 momentum components,
//! grouped per body as (x, y, z). The tabulated heliocentric data carries
//! G*mass products; masses are recovered with G = 6.67430e-11. The Sun is
//! placed at the origin with the velocity that zeroes total linear momentum.

use crate::error::{Error, Result};
use crate::invariant::{Invariant, InvariantSet};
use crate::state::StateVector;
use crate::system::{ConservativeSystem, SeparableHamiltonian};

pub const GRAVITATIONAL_CONSTANT: f64 = 6.67430e-11;
/// Julian year in seconds.
pub const SECONDS_PER_YEAR: f64 = 3.15576e7;
const GM_SUN: f64 = 1.32712440018e20;
const COLLISION_GUARD: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct SolarBody {
    pub name: String,
    /// Heliocentric position, m.
    pub position: [f64; 3],
    /// Heliocentric velocity, m/s.
    pub velocity: [f64; 3],
    /// Gravitational parameter G*m, m^3/s^2.
    pub gm: f64,
}

/// Planetary ephemeris rows (position m, velocity m/s, G*mass m^3/s^2).
const EPHEMERIS: [(&str, [f64; 3], [f64; 3], f64); 9] = [
    (
        "mercury",
        [1.563021412664830e+10, 4.327888220902108e+10, 2.102123103174893e+09],
        [-5.557001175482630e+04, 1.840863017229157e+04, 6.602621285552567e+03],
        2.203209e+13,
    ),
    (
        "venus",
        [-9.030189258080004e+10, 5.802615456116644e+10, 6.006513603716755e+09],
        [-1.907374632532257e+04, -2.963461693326599e+04, 6.946391255404438e+02],
        3.248586e+14,
    ),
    (
        "earth",
        [-1.018974476358996e+11, 1.065689158175689e+11, -3.381951053601424e+06],
        [-2.201749257051057e+04, -2.071074857788741e+04, 1.575245213712245e+00],
        3.986004e+14,
    ),
    (
        "mars",
        [-2.443763125844157e+11, 4.473211564076996e+10, 6.935657388967808e+09],
        [-3.456935754608896e+03, -2.176307370133160e+04, -3.711433859326417e-02],
        4.282830e+13,
    ),
    (
        "jupiter",
        [-2.3516546827532200e+11, 7.421837640432589e+11, 2.179850895804323e+09],
        [-1.262559929908801e+04, -3.332552395475581e+03, 2.962741332356101e+02],
        1.266865e+17,
    ),
    (
        "saturn",
        [-1.011712827283427e+12, -1.077496255617324e+12, 5.901251900068215e+10],
        [6.507898648442419e+03, -6.640809674126991e+03, -1.434198106014633e+02],
        3.793120e+16,
    ),
    (
        "uranus",
        [2.934840841770302e+12, 6.048399137411513e+11, -3.576451387567792e+10],
        [-1.433852081777671e+03, 6.347897341634990e+03, 4.228261484335974e+01],
        5.793966e+15,
    ),
    (
        "neptune",
        [4.055112581124043e+12, -1.914578873112663e+12, -5.400973716179796e+10],
        [2.275119229131818e+03, 4.942356914027413e+03, -1.548950389954096e+02],
        6.835107e+15,
    ),
    (
        "pluto",
        [9.514009594170194e+11, -4.776029500570151e+12, 2.358627841705075e+11],
        [5.431808363374300e+03, -2.387056445508962e+01, -1.551877289694926e+03],
        8.72400e+11,
    ),
];

#[derive(Debug, Clone)]
pub struct SolarSystem {
    bodies: Vec<SolarBody>,
    masses: Vec<f64>,
}

impl SolarSystem {
    /// The embedded ten-body configuration.
    pub fn from_ephemeris() -> Self {
        let planets: Vec<SolarBody> = EPHEMERIS
            .iter()
            .map(|(name, p, v, gm)| SolarBody {
                name: (*name).into(),
                position: *p,
                velocity: *v,
                gm: *gm,
            })
            .collect();
        Self::from_planets(planets)
    }

    /// Build from planet rows, closing the system with a Sun at the origin
    /// whose velocity zeroes the total linear momentum.
    pub fn from_planets(planets: Vec<SolarBody>) -> Self {
        let m_sun = GM_SUN / GRAVITATIONAL_CONSTANT;
        let mut sun_velocity = [0.0; 3];
        for b in &planets {
            let m = b.gm / GRAVITATIONAL_CONSTANT;
            for k in 0..3 {
                sun_velocity[k] -= m * b.velocity[k] / m_sun;
            }
        }
        let mut bodies = vec![SolarBody {
            name: "sun".into(),
            position: [0.0; 3],
            velocity: sun_velocity,
            gm: GM_SUN,
        }];
        bodies.extend(planets);
        let masses = bodies.iter().map(|b| b.gm / GRAVITATIONAL_CONSTANT).collect();
        Self { bodies, masses }
    }

    /// Read bodies from a CSV with columns (name, x, y, z, vx, vy, vz, gm) in
    /// SI units; the Sun closure is applied as for the embedded table.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut planets = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with("name") {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 8 {
                return Err(Error::InvalidArgument(format!(
                    "ephemeris CSV line {}: expected 8 fields, got {}",
                    lineno + 1,
                    fields.len()
                )));
            }
            let num = |s: &str| -> Result<f64> {
                s.parse::<f64>().map_err(|_| {
                    Error::InvalidArgument(format!(
                        "ephemeris CSV line {}: bad number '{s}'",
                        lineno + 1
                    ))
                })
            };
            planets.push(SolarBody {
                name: fields[0].into(),
                position: [num(fields[1])?, num(fields[2])?, num(fields[3])?],
                velocity: [num(fields[4])?, num(fields[5])?, num(fields[6])?],
                gm: num(fields[7])?,
            });
        }
        if planets.is_empty() {
            return Err(Error::InvalidArgument("ephemeris CSV holds no bodies".into()));
        }
        Ok(Self::from_planets(planets))
    }

    pub fn bodies(&self) -> &[SolarBody] {
        &self.bodies
    }

    pub fn n_bodies(&self) -> usize {
        self.bodies.len()
    }

    pub fn hamiltonian(&self, y: &[f64]) -> f64 {
        let n = self.n_bodies();
        let (q, p) = y.split_at(3 * n);
        let mut t = 0.0;
        for i in 0..n {
            let pi = &p[3 * i..3 * i + 3];
            t += 0.5 * (pi[0] * pi[0] + pi[1] * pi[1] + pi[2] * pi[2]) / self.masses[i];
        }
        let mut v = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                let r = separation(q, i, j);
                v -= GRAVITATIONAL_CONSTANT * self.masses[i] * self.masses[j] / r;
            }
        }
        t + v
    }

    /// Angular momentum components (L_x, L_y, L_z).
    pub fn angular_momentum(&self, y: &[f64]) -> [f64; 3] {
        let n = self.n_bodies();
        let (q, p) = y.split_at(3 * n);
        let mut l = [0.0; 3];
        for i in 0..n {
            let qi = &q[3 * i..3 * i + 3];
            let pi = &p[3 * i..3 * i + 3];
            l[0] += qi[1] * pi[2] - qi[2] * pi[1];
            l[1] += qi[2] * pi[0] - qi[0] * pi[2];
            l[2] += qi[0] * pi[1] - qi[1] * pi[0];
        }
        l
    }

    /// Total linear momentum.
    pub fn linear_momentum(&self, y: &[f64]) -> [f64; 3] {
        let n = self.n_bodies();
        let p = &y[3 * n..];
        let mut out = [0.0; 3];
        for i in 0..n {
            for k in 0..3 {
                out[k] += p[3 * i + k];
            }
        }
        out
    }

    fn forces(&self, q: &[f64]) -> Result<Vec<f64>> {
        let n = self.n_bodies();
        let mut f = vec![0.0; 3 * n];
        for i in 0..n {
            for j in i + 1..n {
                let r = separation(q, i, j);
                if r < COLLISION_GUARD {
                    return Err(Error::CollisionSingularity {
                        system: "solar".into(),
                        distance: r,
                    });
                }
                let w = GRAVITATIONAL_CONSTANT * self.masses[i] * self.masses[j] / (r * r * r);
                for k in 0..3 {
                    let d = q[3 * i + k] - q[3 * j + k];
                    f[3 * i + k] -= w * d;
                    f[3 * j + k] += w * d;
                }
            }
        }
        Ok(f)
    }
}

fn separation(q: &[f64], i: usize, j: usize) -> f64 {
    let dx = q[3 * i] - q[3 * j];
    let dy = q[3 * i + 1] - q[3 * j + 1];
    let dz = q[3 * i + 2] - q[3 * j + 2];
    (dx * dx + dy * dy + dz * dz).sqrt()
}

impl ConservativeSystem for SolarSystem {
    fn name(&self) -> &str {
        "solar"
    }

    fn dim(&self) -> usize {
        6 * self.n_bodies()
    }

    fn rhs(&self, y: &[f64]) -> Result<Vec<f64>> {
        let n = self.n_bodies();
        let (q, p) = y.split_at(3 * n);
        let mut out = Vec::with_capacity(6 * n);
        for i in 0..n {
            for k in 0..3 {
                out.push(p[3 * i + k] / self.masses[i]);
            }
        }
        out.extend(self.forces(q)?);
        Ok(out)
    }

    fn invariants(&self) -> InvariantSet {
        let n = self.n_bodies();
        let me = self.clone();
        let h = Invariant::new(
            "H",
            move |y: &[f64]| me.hamiltonian(y),
            {
                let me = self.clone();
                move |y: &[f64]| {
                    // grad_q H = -forces, grad_p H = velocities
                    let (q, p) = y.split_at(3 * n);
                    let mut g = me.forces(q).expect("gradient inside collision guard");
                    for v in g.iter_mut() {
                        *v = -*v;
                    }
                    for i in 0..n {
                        for k in 0..3 {
                            g.push(p[3 * i + k] / me.masses[i]);
                        }
                    }
                    g
                }
            },
        );
        let mut items = vec![h];
        for (name, a, b) in [("Lx", 1usize, 2usize), ("Ly", 2, 0), ("Lz", 0, 1)] {
            let me = self.clone();
            items.push(Invariant::new(
                name,
                move |y: &[f64]| {
                    let l = me.angular_momentum(y);
                    match name {
                        "Lx" => l[0],
                        "Ly" => l[1],
                        _ => l[2],
                    }
                },
                move |y: &[f64]| {
                    // L = sum over bodies of q[a] p[b] - q[b] p[a]
                    let (q, p) = y.split_at(3 * n);
                    let mut g = vec![0.0; 6 * n];
                    for i in 0..n {
                        g[3 * i + a] = p[3 * i + b];
                        g[3 * i + b] = -p[3 * i + a];
                        g[3 * n + 3 * i + b] = q[3 * i + a];
                        g[3 * n + 3 * i + a] = -q[3 * i + b];
                    }
                    g
                },
            ));
        }
        InvariantSet::new(items, &self.initial_state()).expect("finite reference invariants")
    }

    fn initial_state(&self) -> StateVector {
        let n = self.n_bodies();
        let mut y = Vec::with_capacity(6 * n);
        for b in &self.bodies {
            y.extend_from_slice(&b.position);
        }
        for (b, &m) in self.bodies.iter().zip(&self.masses) {
            y.extend(b.velocity.iter().map(|v| m * v));
        }
        StateVector::new(y).expect("finite ephemeris")
    }

    fn as_separable(&self) -> Option<&dyn SeparableHamiltonian> {
        Some(self)
    }
}

impl SeparableHamiltonian for SolarSystem {
    fn grad_kinetic(&self, p: &[f64]) -> Vec<f64> {
        let n = self.n_bodies();
        let mut out = Vec::with_capacity(3 * n);
        for i in 0..n {
            for k in 0..3 {
                out.push(p[3 * i + k] / self.masses[i]);
            }
        }
        out
    }

    fn grad_potential(&self, q: &[f64]) -> Result<Vec<f64>> {
        let mut f = self.forces(q)?;
        for v in f.iter_mut() {
            *v = -*v;
        }
        Ok(f)
    }
}
