//! Config-driven execution: builds systems and methods, runs the study for
//! each cell, and writes CSV/snapshot artifacts atomically.

use crate::config::{Cell, ExperimentConfig, SystemParams};
use conservo::analysis::{
    lambda_error_study, run_invariant_study, self_convergence_study, write_drift_csv,
    write_series_csv, MethodSpec,
};
use conservo::gpe::{write_snapshot, GpeConfig, GpePotential, GpeSystem};
use conservo::systems::{ChargedParticle2D, FieldConfig, HarmonicOscillator, PerturbedKepler, SolarSystem};
use conservo::{ConservativeSystem, Error as LibError, NewtonPolicy, ProjectionDirection};
use std::fmt;
use std::path::{Path, PathBuf};

/// Failure classes mapped to process exit codes: usage errors exit 2,
/// integration failures exit 3.
#[derive(Debug)]
pub enum RunError {
    Usage(String),
    Runtime { message: String },
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Usage(m) => write!(f, "usage error: {m}"),
            RunError::Runtime { message } => write!(f, "runtime error: {message}"),
        }
    }
}

impl RunError {
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Usage(_) => 2,
            RunError::Runtime { .. } => 3,
        }
    }

    fn usage(m: impl Into<String>) -> Self {
        RunError::Usage(m.into())
    }
}

fn classify(e: LibError, context: &str) -> RunError {
    match e {
        LibError::Aborted { .. }
        | LibError::CollisionSingularity { .. }
        | LibError::NonFiniteStage { .. }
        | LibError::SingularDirections { .. }
        | LibError::SingularNewtonJacobian { .. }
        | LibError::NewtonDidNotConverge { .. }
        | LibError::NonFiniteInvariant { .. }
        | LibError::NonFinite { .. } => RunError::Runtime {
            message: format!("{context}: {e}"),
        },
        other => RunError::usage(format!("{context}: {other}")),
    }
}

pub const GPE_SYSTEM_NAMES: [&str; 2] = ["gpe-plane", "gpe-vortex"];

pub fn build_system(name: &str, p: &SystemParams) -> Result<Box<dyn ConservativeSystem>, RunError> {
    match name {
        "harmonic" => Ok(Box::new(HarmonicOscillator::new(p.omega.unwrap_or(10.0)))),
        "kepler" => Ok(Box::new(PerturbedKepler::new(p.eccentricity.unwrap_or(0.6)))),
        "solar" => match &p.ephemeris_csv {
            None => Ok(Box::new(SolarSystem::from_ephemeris())),
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| RunError::usage(format!("ephemeris csv {path}: {e}")))?;
                Ok(Box::new(
                    SolarSystem::from_csv(&text)
                        .map_err(|e| RunError::usage(format!("ephemeris csv {path}: {e}")))?,
                ))
            }
        },
        "particle-uniform" => Ok(Box::new(ChargedParticle2D::new(FieldConfig::Uniform))),
        "particle-tokamak" => Ok(Box::new(ChargedParticle2D::new(FieldConfig::Tokamak))),
        "gpe-plane" | "gpe-vortex" => {
            let potential = match p.potential.as_deref() {
                None => {
                    if name == "gpe-plane" {
                        GpePotential::Zero
                    } else {
                        let g = p.gamma.unwrap_or([1.0, 1.0]);
                        GpePotential::Harmonic {
                            gamma_x: g[0],
                            gamma_y: g[1],
                        }
                    }
                }
                Some("zero") => GpePotential::Zero,
                Some("harmonic") => {
                    let g = p.gamma.unwrap_or([1.0, 1.0]);
                    GpePotential::Harmonic {
                        gamma_x: g[0],
                        gamma_y: g[1],
                    }
                }
                Some(other) => {
                    return Err(RunError::usage(format!(
                        "unknown potential '{other}'; valid: zero, harmonic"
                    )))
                }
            };
            let tau = 2.0 * std::f64::consts::PI;
            let default_domain = if name == "gpe-plane" {
                [0.0, tau, 0.0, tau]
            } else {
                [-2.0, 2.0, -2.0, 2.0]
            };
            let cfg = GpeConfig {
                domain: p.domain.unwrap_or(default_domain),
                nx: p.nx.unwrap_or(32),
                ny: p.ny.unwrap_or(32),
                beta: p.beta.unwrap_or(1.0),
                omega: p.rotation.unwrap_or(0.0),
                potential,
            };
            let sys = if name == "gpe-plane" {
                GpeSystem::plane_wave(cfg, p.amplitude.unwrap_or(1.0), p.kappa.unwrap_or([1.0, 1.0]))
            } else {
                GpeSystem::gaussian_vortex(cfg)
            };
            Ok(Box::new(sys.map_err(|e| RunError::usage(e.to_string()))?))
        }
        other => Err(RunError::usage(format!(
            "unknown system '{other}'; valid: harmonic, kepler, solar, particle-uniform, \
             particle-tokamak, gpe-plane, gpe-vortex"
        ))),
    }
}

pub const METHOD_NAMES: [&str; 4] = ["bare-rk", "eip", "newton-projection", "stormer-verlet"];

fn build_method(cell: &Cell) -> Result<MethodSpec, RunError> {
    match cell.method.as_str() {
        "bare-rk" => Ok(MethodSpec::BareRk),
        "eip" => Ok(MethodSpec::Eip {
            direction: ProjectionDirection::parse(&cell.direction)
                .map_err(|e| RunError::usage(e.to_string()))?,
        }),
        "newton-projection" => Ok(MethodSpec::NewtonProjection {
            policy: NewtonPolicy {
                max_iters: cell.newton.max_iters.unwrap_or(1),
                tol: cell.newton.tol.unwrap_or(0.0),
            },
        }),
        "stormer-verlet" => Ok(MethodSpec::StormerVerlet),
        other => Err(RunError::usage(format!(
            "unknown method '{other}'; valid: {}",
            METHOD_NAMES.join(", ")
        ))),
    }
}

/// Atomic write: temp file in the target directory, then rename.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), RunError> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, bytes)
        .and_then(|_| std::fs::rename(&tmp, path))
        .map_err(|e| RunError::usage(format!("cannot write {}: {e}", path.display())))
}

fn positive(v: Option<f64>, what: &str) -> Result<f64, RunError> {
    match v {
        Some(x) if x > 0.0 => Ok(x),
        Some(x) => Err(RunError::usage(format!("{what} must be > 0, got {x}"))),
        None => Err(RunError::usage(format!("{what} is required for this study"))),
    }
}

fn run_cell(cfg: &ExperimentConfig, cell: &Cell, out_dir: &Path) -> Result<PathBuf, RunError> {
    let sys = build_system(&cfg.system, &cfg.params)?;
    let method = build_method(cell)?;
    let tab = conservo::tableau(&cell.tableau).map_err(|e| RunError::usage(e.to_string()))?;
    let full = sys.invariants();
    let inv = if cell.invariants.is_empty() {
        full.clone()
    } else {
        let names: Vec<&str> = cell.invariants.iter().map(String::as_str).collect();
        full.select(&names).map_err(|e| RunError::usage(e.to_string()))?
    };
    let out_path = out_dir.join(&cell.output);
    let label = format!("{}-{}", method.label(), inv.names().join(""));

    match cfg.study.as_str() {
        "convergence" => {
            let h = positive(cell.h, "h")?;
            let horizon = positive(cfg.horizon, "horizon")?;
            let series = self_convergence_study(
                sys.as_ref(),
                &inv,
                &method,
                &tab,
                h,
                cfg.levels.max(3),
                horizon,
                &label,
            )
            .map_err(|e| classify(e, &label))?;
            let mut buf = Vec::new();
            write_series_csv(
                &mut buf,
                "convergence",
                sys.name(),
                &method.label(),
                &tab.name,
                &series,
            )
            .map_err(|e| classify(e, &label))?;
            write_atomic(&out_path, &buf)?;
        }
        "lambda" => {
            if cfg.system != "harmonic" {
                return Err(RunError::usage(
                    "the lambda study needs the analytic oscillator multiplier; system must be 'harmonic'",
                ));
            }
            if cfg.h_levels.len() < 3 {
                return Err(RunError::usage("lambda study needs h_levels with >= 3 entries"));
            }
            let series = lambda_error_study(
                cfg.params.omega.unwrap_or(10.0),
                [1.0, 0.0],
                &tab,
                &cfg.h_levels,
            )
            .map_err(|e| classify(e, &label))?;
            let mut buf = Vec::new();
            write_series_csv(&mut buf, "lambda", sys.name(), &method.label(), &tab.name, &series)
                .map_err(|e| classify(e, &label))?;
            write_atomic(&out_path, &buf)?;
        }
        "invariant-drift" | "snapshot" => {
            let h = positive(cell.h, "h")?;
            let horizon = positive(cfg.horizon, "horizon")?;
            let run = run_invariant_study(
                sys.as_ref(),
                &inv,
                &full,
                &method,
                &tab,
                h,
                horizon,
                cfg.sample_stride,
                &cfg.snapshot_times,
            )
            .map_err(|e| classify(e, &label))?;
            let mut buf = Vec::new();
            write_drift_csv(&mut buf, &run).map_err(|e| classify(e, &label))?;
            write_atomic(&out_path, &buf)?;
            if cfg.study == "snapshot" {
                let shape = sys.grid_shape().ok_or_else(|| {
                    RunError::usage(format!(
                        "snapshot study needs a grid-shaped system, '{}' is not one",
                        cfg.system
                    ))
                })?;
                for (t, state) in &run.snapshots {
                    let name = format!(
                        "{}-t{:.4}.snap",
                        out_path.file_stem().unwrap_or_default().to_string_lossy(),
                        t
                    );
                    let snap_path = out_path.with_file_name(name);
                    let mut bytes = Vec::new();
                    write_snapshot(&mut bytes, state, &shape, *t)
                        .map_err(|e| classify(e, &label))?;
                    write_atomic(&snap_path, &bytes)?;
                }
            }
        }
        other => {
            return Err(RunError::usage(format!(
                "unknown study '{other}'; valid: convergence, lambda, invariant-drift, snapshot"
            )))
        }
    }
    Ok(out_path)
}

/// Execute every cell of a config, optionally in parallel.
pub fn run_config(
    cfg: &ExperimentConfig,
    out_dir: &Path,
    jobs: usize,
    allow_long: bool,
) -> Result<Vec<PathBuf>, RunError> {
    if cfg.long && !allow_long {
        return Err(RunError::usage(
            "this experiment is tagged long; rerun with --long to enable full-scale horizons",
        ));
    }
    std::fs::create_dir_all(out_dir)
        .map_err(|e| RunError::usage(format!("cannot create {}: {e}", out_dir.display())))?;
    let cells = cfg.cells();
    let jobs = jobs.max(1).min(cells.len().max(1));
    if jobs == 1 {
        let mut outputs = Vec::new();
        for cell in &cells {
            outputs.push(run_cell(cfg, cell, out_dir)?);
        }
        return Ok(outputs);
    }
    let mut results: Vec<Option<Result<PathBuf, RunError>>> = (0..cells.len()).map(|_| None).collect();
    std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for (i, cell) in cells.iter().enumerate() {
            handles.push((i, scope.spawn(move || run_cell(cfg, cell, out_dir))));
        }
        for (i, handle) in handles {
            results[i] = Some(handle.join().expect("cell worker panicked"));
        }
    });
    results
        .into_iter()
        .map(|r| r.expect("all cells were scheduled"))
        .collect()
}
