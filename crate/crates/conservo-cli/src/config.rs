//! Experiment configuration files: flat TOML, one file per table or figure.

use serde::Deserialize;
use std::path::Path;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// convergence | lambda | invariant-drift | snapshot
    pub study: String,
    pub system: String,
    #[serde(default = "default_method")]
    pub method: String,
    #[serde(default = "default_tableau")]
    pub tableau: String,
    /// Invariants the projection acts on (subset by name). Empty = all.
    #[serde(default)]
    pub invariants: Vec<String>,
    /// predicted | previous | midpoint
    #[serde(default = "default_direction")]
    pub direction: String,
    pub h: Option<f64>,
    pub horizon: Option<f64>,
    /// Ladder depth for convergence studies.
    #[serde(default = "default_levels")]
    pub levels: usize,
    /// Explicit step ladder for the lambda study.
    #[serde(default)]
    pub h_levels: Vec<f64>,
    #[serde(default = "default_stride")]
    pub sample_stride: usize,
    /// Snapshot capture times.
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
    pub output: String,
    /// Full-scale horizons are gated behind --long.
    #[serde(default)]
    pub long: bool,
    #[serde(default)]
    pub newton: NewtonConfig,
    #[serde(default)]
    pub params: SystemParams,
    /// Independent cells: each entry overrides fields of the base experiment.
    #[serde(default)]
    pub variants: Vec<VariantConfig>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct NewtonConfig {
    pub max_iters: Option<usize>,
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SystemParams {
    // oscillator
    pub omega: Option<f64>,
    // Kepler
    pub eccentricity: Option<f64>,
    // solar
    pub ephemeris_csv: Option<String>,
    // GPE discretization
    pub nx: Option<usize>,
    pub ny: Option<usize>,
    pub beta: Option<f64>,
    pub rotation: Option<f64>,
    pub domain: Option<[f64; 4]>,
    pub amplitude: Option<f64>,
    pub kappa: Option<[f64; 2]>,
    /// zero | harmonic
    pub potential: Option<String>,
    pub gamma: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariantConfig {
    pub method: Option<String>,
    pub tableau: Option<String>,
    pub invariants: Option<Vec<String>>,
    pub direction: Option<String>,
    pub h: Option<f64>,
    pub output: String,
    pub newton: Option<NewtonConfig>,
}

/// One fully resolved (system, method, h) cell.
#[derive(Debug, Clone)]
pub struct Cell {
    pub method: String,
    pub tableau: String,
    pub invariants: Vec<String>,
    pub direction: String,
    pub h: Option<f64>,
    pub output: String,
    pub newton: NewtonConfig,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| anyhow::anyhow!("cannot read config {}: {e}", path.display()))?;
        let cfg: ExperimentConfig =
            toml::from_str(&text).map_err(|e| anyhow::anyhow!("config parse error: {e}"))?;
        Ok(cfg)
    }

    /// Expand the base experiment and its variants into independent cells.
    pub fn cells(&self) -> Vec<Cell> {
        let base = Cell {
            method: self.method.clone(),
            tableau: self.tableau.clone(),
            invariants: self.invariants.clone(),
            direction: self.direction.clone(),
            h: self.h,
            output: self.output.clone(),
            newton: self.newton.clone(),
        };
        if self.variants.is_empty() {
            return vec![base];
        }
        self.variants
            .iter()
            .map(|v| Cell {
                method: v.method.clone().unwrap_or_else(|| base.method.clone()),
                tableau: v.tableau.clone().unwrap_or_else(|| base.tableau.clone()),
                invariants: v.invariants.clone().unwrap_or_else(|| base.invariants.clone()),
                direction: v.direction.clone().unwrap_or_else(|| base.direction.clone()),
                h: v.h.or(base.h),
                output: v.output.clone(),
                newton: v.newton.clone().unwrap_or_else(|| base.newton.clone()),
            })
            .collect()
    }
}

fn default_method() -> String {
    "eip".into()
}

fn default_tableau() -> String {
    "RK4".into()
}

fn default_direction() -> String {
    "predicted".into()
}

fn default_levels() -> usize {
    3
}

fn default_stride() -> usize {
    1
}
