//! Scenario configs (JSON) and the batch drivers built on them.

mod converge;
mod run;

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use crate::diagnostics::DiagnosticsError;
use crate::fields::{catalog, FieldError, VectorFieldSpec};
use crate::flow::{FlowError, FlowOptions};
use crate::io::IoError;
use crate::measure::{Atom, AtomicSignedMeasure, MeasureError};
use crate::numeric::fsum;
use crate::transport::TransportError;

pub use converge::{convergence_study, ConvergenceRow, ConvergenceTable};
pub use run::{run_scenario, OutputFormat, RunOutcome, RunSummary, BOUND_SLACK};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error(transparent)]
    Diagnostics(#[from] DiagnosticsError),
    #[error(transparent)]
    Io(#[from] IoError),
}

impl ScenarioError {
    /// Short machine-readable category for error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Config(_) => "config",
            Self::Field(_) => "field",
            Self::Flow(_) => "flow",
            Self::Measure(_) => "measure",
            Self::Transport(_) => "transport",
            Self::Diagnostics(_) => "diagnostics",
            Self::Io(_) => "io",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FieldConfig {
    pub key: String,
    #[serde(flatten)]
    pub params: Map<String, Value>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    /// Midpoint quantization on a regular grid.
    #[default]
    Grid,
    /// Seeded Monte Carlo with equal weights.
    Random,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Density {
    /// Uniform on the box [lo, hi].
    Uniform { lo: Vec<f64>, hi: Vec<f64> },
    /// Isotropic normal, truncated to mean ± 4·std for grid sampling.
    Gaussian { mean: Vec<f64>, std: f64 },
    /// Uniform on a circle in the plane.
    Ring { center: Vec<f64>, radius: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialConfig {
    /// Inline measure document.
    Atoms {
        dimension: usize,
        atoms: Vec<(Vec<f64>, f64)>,
        #[serde(default)]
        reservoir: f64,
    },
    /// Measure JSON on disk, relative to the config file.
    File { path: PathBuf },
    /// Unit-mass density quantized with `resolution` points per axis.
    Density {
        density: Density,
        resolution: usize,
        #[serde(default)]
        sampling: Sampling,
    },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParameterMode {
    /// Use the given α, β, δ.
    #[default]
    Fixed,
    /// Derive α, β, δ per k from the trajectory.
    Schedule,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsConfig {
    #[serde(default = "default_k")]
    pub k: Vec<u32>,
    #[serde(default)]
    pub mode: ParameterMode,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// Tolerance factor of the reference solution ρ^hi relative to ρ^lo.
    #[serde(default = "default_refine")]
    pub refine_factor: f64,
}

fn default_k() -> Vec<u32> {
    vec![2]
}
fn default_alpha() -> f64 {
    0.05
}
fn default_beta() -> f64 {
    1.0
}
fn default_delta() -> f64 {
    0.1
}
fn default_refine() -> f64 {
    1e-2
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        Self {
            k: default_k(),
            mode: ParameterMode::Fixed,
            alpha: default_alpha(),
            beta: default_beta(),
            delta: default_delta(),
            refine_factor: default_refine(),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceConfig {
    #[serde(default = "d_abs")]
    pub abs: f64,
    #[serde(default = "d_rel")]
    pub rel: f64,
    #[serde(default = "d_max_step")]
    pub max_step: f64,
    #[serde(default = "d_min_step")]
    pub min_step: f64,
    #[serde(default = "d_max_steps")]
    pub max_steps: usize,
}

fn d_abs() -> f64 {
    FlowOptions::default().abs_tol
}
fn d_rel() -> f64 {
    FlowOptions::default().rel_tol
}
fn d_max_step() -> f64 {
    1e3
}
fn d_min_step() -> f64 {
    FlowOptions::default().min_step
}
fn d_max_steps() -> usize {
    FlowOptions::default().max_steps
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self { abs: d_abs(), rel: d_rel(), max_step: d_max_step(), min_step: d_min_step(), max_steps: d_max_steps() }
    }
}

impl ToleranceConfig {
    pub fn flow_options(&self) -> FlowOptions {
        FlowOptions {
            abs_tol: self.abs,
            rel_tol: self.rel,
            max_step: self.max_step,
            min_step: self.min_step,
            max_steps: self.max_steps,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub field: FieldConfig,
    pub initial: InitialConfig,
    /// Time horizon T.
    pub horizon: f64,
    /// Number of grid times including 0 and T.
    pub grid: usize,
    #[serde(default)]
    pub diagnostics: DiagnosticsConfig,
    #[serde(default)]
    pub tolerances: ToleranceConfig,
    #[serde(default)]
    pub out: Option<PathBuf>,
    /// Mandatory: there is no entropy-seeded default.
    pub seed: u64,
    /// Directory that relative paths in the config resolve against.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| ScenarioError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ScenarioError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_json(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(ScenarioError::Config(format!("horizon must be positive, got {}", self.horizon)));
        }
        if self.grid < 2 {
            return Err(ScenarioError::Config(format!("grid needs at least 2 times, got {}", self.grid)));
        }
        if self.diagnostics.k.is_empty() || self.diagnostics.k.contains(&0) {
            return Err(ScenarioError::Config("diagnostics.k must list positive integers".into()));
        }
        if !(self.diagnostics.refine_factor > 0.0 && self.diagnostics.refine_factor < 1.0) {
            return Err(ScenarioError::Config("diagnostics.refine_factor must lie in (0,1)".into()));
        }
        self.tolerances.flow_options().validate()?;
        Ok(())
    }

    pub fn field(&self) -> Result<VectorFieldSpec, ScenarioError> {
        Ok(catalog::by_key(&self.field.key, &self.field.params)?)
    }

    /// Uniform time grid 0 = t₀ < … < t_{grid−1} = T.
    pub fn times(&self) -> Vec<f64> {
        let m = self.grid - 1;
        (0..=m).map(|i| if i == m { self.horizon } else { self.horizon * i as f64 / m as f64 }).collect()
    }

    pub fn initial_measure(&self) -> Result<AtomicSignedMeasure, ScenarioError> {
        self.initial_measure_at(None)
    }

    /// ρ₀, with the density resolution overridden when quantizing.
    pub fn initial_measure_at(&self, resolution: Option<usize>) -> Result<AtomicSignedMeasure, ScenarioError> {
        match &self.initial {
            InitialConfig::Atoms { dimension, atoms, reservoir } => Ok(AtomicSignedMeasure::new(
                *dimension,
                atoms.iter().map(|(x, w)| Atom::new(x.clone(), *w)).collect(),
                *reservoir,
            )?),
            InitialConfig::File { path } => {
                let p = match &self.base_dir {
                    Some(b) if path.is_relative() => b.join(path),
                    _ => path.clone(),
                };
                Ok(crate::io::read_measure(&p)?)
            }
            InitialConfig::Density { density, resolution: r, sampling } => {
                quantize(density, resolution.unwrap_or(*r), *sampling, self.seed)
            }
        }
    }

    /// Base resolution of a density initial measure.
    pub fn resolution(&self) -> Option<usize> {
        match &self.initial {
            InitialConfig::Density { resolution, .. } => Some(*resolution),
            _ => None,
        }
    }
}

/// Unit-mass atomic approximation of `density`.
pub fn quantize(density: &Density, resolution: usize, sampling: Sampling, seed: u64) -> Result<AtomicSignedMeasure, ScenarioError> {
    if resolution == 0 {
        return Err(ScenarioError::Config("resolution must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (dim, points, weights): (usize, Vec<Vec<f64>>, Vec<f64>) = match (density, sampling) {
        (Density::Uniform { lo, hi }, _) if lo.len() != hi.len() || lo.is_empty() || lo.iter().zip(hi).any(|(a, b)| !(a < b)) => {
            return Err(ScenarioError::Config("uniform density needs lo < hi componentwise".into()));
        }
        (Density::Uniform { lo, hi }, Sampling::Grid) => {
            let pts = midpoint_grid(lo, hi, resolution);
            let w = vec![1.0; pts.len()];
            (lo.len(), pts, w)
        }
        (Density::Uniform { lo, hi }, Sampling::Random) => {
            let count = resolution.pow(lo.len() as u32);
            let pts = (0..count)
                .map(|_| lo.iter().zip(hi).map(|(a, b)| a + (b - a) * rng.random::<f64>()).collect())
                .collect::<Vec<Vec<f64>>>();
            (lo.len(), pts, vec![1.0; count])
        }
        (Density::Gaussian { mean, std }, _) if mean.is_empty() || !(*std > 0.0) => {
            return Err(ScenarioError::Config("gaussian density needs a mean and std > 0".into()));
        }
        (Density::Gaussian { mean, std }, Sampling::Grid) => {
            let lo: Vec<f64> = mean.iter().map(|m| m - 4.0 * std).collect();
            let hi: Vec<f64> = mean.iter().map(|m| m + 4.0 * std).collect();
            let pts = midpoint_grid(&lo, &hi, resolution);
            let w = pts
                .iter()
                .map(|p| (-crate::numeric::distance(p, mean).powi(2) / (2.0 * std * std)).exp())
                .collect();
            (mean.len(), pts, w)
        }
        (Density::Gaussian { mean, std }, Sampling::Random) => {
            let normal = Normal::new(0.0, *std).map_err(|e| ScenarioError::Config(e.to_string()))?;
            let count = resolution.pow(mean.len() as u32);
            let pts = (0..count)
                .map(|_| mean.iter().map(|m| m + normal.sample(&mut rng)).collect())
                .collect::<Vec<Vec<f64>>>();
            (mean.len(), pts, vec![1.0; count])
        }
        (Density::Ring { center, radius }, _) if center.len() != 2 || !(*radius > 0.0) => {
            return Err(ScenarioError::Config("ring density needs a planar center and radius > 0".into()));
        }
        (Density::Ring { center, radius }, mode) => {
            let pts = (0..resolution)
                .map(|i| {
                    let theta = match mode {
                        Sampling::Grid => std::f64::consts::TAU * i as f64 / resolution as f64,
                        Sampling::Random => std::f64::consts::TAU * rng.random::<f64>(),
                    };
                    vec![center[0] + radius * theta.cos(), center[1] + radius * theta.sin()]
                })
                .collect::<Vec<_>>();
            (2, pts, vec![1.0; resolution])
        }
    };
    let total = fsum(weights.iter().copied());
    let atoms = points.into_iter().zip(weights).map(|(p, w)| Atom::new(p, w / total)).collect();
    Ok(AtomicSignedMeasure::new(dim, atoms, 0.0)?)
}

/// Cell midpoints of an `n`-per-axis grid over the box.
fn midpoint_grid(lo: &[f64], hi: &[f64], n: usize) -> Vec<Vec<f64>> {
    let d = lo.len();
    let mut out = Vec::with_capacity(n.pow(d as u32));
    let mut idx = vec![0usize; d];
    loop {
        out.push(
            (0..d)
                .map(|k| lo[k] + (hi[k] - lo[k]) * (idx[k] as f64 + 0.5) / n as f64)
                .collect(),
        );
        let mut k = 0;
        while k < d {
            idx[k] += 1;
            if idx[k] < n {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == d {
            return out;
        }
    }
}
