//! Resolution ladders: the same (b, ρ₀) at doubling quantization and
//! tightening integrator tolerances, compared at T in the reference W.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::flow::flow_push;
use crate::io::{write_atomic, write_json};
use crate::transport::reference_w_signed;

use super::run::OutputFormat;
use super::{ScenarioConfig, ScenarioError};

/// Smallest accepted ratio between consecutive W on Lipschitz fields.
pub const LIPSCHITZ_MIN_RATIO: f64 = 1.8;
/// Tolerance factor per rung.
const TOLERANCE_STEP: f64 = 0.25;

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    pub rung: usize,
    pub resolution: usize,
    pub atoms: usize,
    pub rel_tol: f64,
    /// W(ρ^{(j)}_T, ρ^{(j+1)}_T); absent on the last rung.
    pub w_next: Option<f64>,
    /// W of the previous rung over this one.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceTable {
    pub name: String,
    pub field: String,
    pub lipschitz: bool,
    pub osgood: bool,
    pub rows: Vec<ConvergenceRow>,
    /// Set when nothing is asserted (modulus fails the Osgood condition).
    pub warning: Option<String>,
    /// None when no assertion applies.
    pub passed: Option<bool>,
}

impl ConvergenceTable {
    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let mut out = String::from("rung,resolution,atoms,rel_tol,W,ratio\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{},{},{},{}", r.rung, r.resolution, r.atoms, r.rel_tol, opt(r.w_next), opt(r.ratio));
        }
        out
    }
}

pub fn convergence_study(
    cfg: &ScenarioConfig,
    ladder: usize,
    out_dir: Option<&Path>,
    format: OutputFormat,
) -> Result<ConvergenceTable, ScenarioError> {
    cfg.validate()?;
    if ladder < 3 {
        return Err(ScenarioError::Config(format!("a ladder needs at least 3 rungs, got {ladder}")));
    }
    let base = cfg
        .resolution()
        .ok_or_else(|| ScenarioError::Config("convergence study needs a density initial measure".into()))?;
    let field = cfg.field()?;
    let opts = cfg.tolerances.flow_options();
    let rungs: Vec<(usize, f64)> = (0..ladder)
        .map(|j| (base << j, opts.rel_tol * TOLERANCE_STEP.powi(j as i32)))
        .collect();
    let finals = rungs
        .par_iter()
        .enumerate()
        .map(|(j, &(res, _))| {
            let m = cfg.initial_measure_at(Some(res))?;
            let o = opts.scaled(TOLERANCE_STEP.powi(j as i32));
            Ok(flow_push(&field, &m, cfg.horizon, &o)?)
        })
        .collect::<Result<Vec<_>, ScenarioError>>()?;
    let w: Vec<f64> = (0..ladder - 1)
        .into_par_iter()
        .map(|j| reference_w_signed(&finals[j], &finals[j + 1]))
        .collect::<Result<_, _>>()?;
    let rows: Vec<ConvergenceRow> = (0..ladder)
        .map(|j| ConvergenceRow {
            rung: j,
            resolution: rungs[j].0,
            atoms: finals[j].len(),
            rel_tol: rungs[j].1,
            w_next: w.get(j).copied(),
            ratio: (j >= 1 && j < ladder - 1).then(|| w[j - 1] / w[j]),
        })
        .collect();

    let osgood = field.modulus.osgood;
    let (warning, passed) = if field.lipschitz {
        (None, Some(rows.iter().filter_map(|r| r.ratio).all(|q| q >= LIPSCHITZ_MIN_RATIO)))
    } else if osgood {
        (None, Some(w.windows(2).all(|p| p[1] < p[0])))
    } else {
        (Some(format!("modulus {:?} fails the Osgood condition: uniqueness is not guaranteed, nothing asserted", field.modulus.tag)), None)
    };
    let table = ConvergenceTable {
        name: cfg.name.clone(),
        field: field.key.clone(),
        lipschitz: field.lipschitz,
        osgood,
        rows,
        warning,
        passed,
    };
    if let Some(dir) = out_dir.map(Path::to_path_buf).or_else(|| cfg.out.clone()) {
        match format {
            OutputFormat::Csv => write_atomic(&dir.join("convergence.csv"), table.to_csv().as_bytes())?,
            OutputFormat::Json => write_json(&dir.join("convergence.json"), &table)?,
        }
    }
    Ok(table)
}
