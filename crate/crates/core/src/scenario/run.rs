//! One scenario end to end: flow, push-forward at two tolerances, the
//! D(t)-versus-bound report per cutoff level, and the output files.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::diagnostics::estimate::variation_integrals;
use crate::diagnostics::residual::default_bank;
use crate::diagnostics::{build_cutoff, parameter_schedule, weak_solution_residual, EstimateSetup, ReportRow};
use crate::fields::{estimate_modulus_constant, ModulusSampling};
use crate::flow::{flow_push_grid, flow_push_grid_detailed, integrate_flow};
use crate::io::{report_csv, trajectory_csv, write_atomic, write_json, write_measure};
use crate::transport::{comparison_bound, reference_w, reference_w_signed, PlanDoc, TransportError};

use super::{ParameterMode, ScenarioConfig, ScenarioError};

/// Relative slack allowed in D ≤ bound.
pub const BOUND_SLACK: f64 = 1e-5;
/// Trajectory dumps per run.
const DUMPED_TRAJECTORIES: usize = 4;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonCheck {
    pub eps: f64,
    pub w: f64,
    /// None when c⁻¹(D/ε) is undefined (D/ε > c(∞)).
    pub bound: Option<f64>,
    pub holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelSummary {
    pub k: u32,
    pub r_k: f64,
    pub alpha: f64,
    pub beta: f64,
    pub delta: f64,
    pub c_omega_k: f64,
    /// Sampled lower estimate of C_{ω,k}, logged next to the declared value.
    pub c_omega_k_estimate: f64,
    pub c_growth: f64,
    /// Three bound terms at T recomputed with scheduled parameters.
    pub schedule_terms: Option<[f64; 3]>,
    pub c_at_one: f64,
    pub max_d_over_bound: f64,
    pub d_within_bound: bool,
    pub comparison: Vec<ComparisonCheck>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub name: String,
    pub field: String,
    pub atoms: usize,
    pub grid: usize,
    pub seed: u64,
    pub mass_initial: f64,
    pub mass_conserved: bool,
    pub variation_conserved: bool,
    /// Atoms frozen at a singular point, with the freeze time.
    pub frozen: Vec<(usize, f64)>,
    pub max_w_refine: f64,
    pub weak_residual: f64,
    pub levels: Vec<LevelSummary>,
    pub passed: bool,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub reports: Vec<(u32, Vec<ReportRow>)>,
    pub summary: RunSummary,
    pub files: Vec<PathBuf>,
}

/// Runs `cfg`; files go to `out_dir` (or the config's `out`) when given.
pub fn run_scenario(cfg: &ScenarioConfig, out_dir: Option<&Path>, format: OutputFormat) -> Result<RunOutcome, ScenarioError> {
    cfg.validate()?;
    let field = cfg.field()?;
    let rho0 = cfg.initial_measure()?;
    if rho0.dimension() != field.dimension {
        return Err(ScenarioError::Config(format!(
            "initial measure has dimension {}, field {} has {}",
            rho0.dimension(),
            field.key,
            field.dimension
        )));
    }
    let times = cfg.times();
    let opts = cfg.tolerances.flow_options();
    let (lo, frozen) = flow_push_grid_detailed(&field, &rho0, &times, &opts)?;
    let hi = flow_push_grid(&field, &rho0, &times, &opts.scaled(cfg.diagnostics.refine_factor))?;

    let (m0, v0) = (rho0.mass(), rho0.total_variation());
    let mass_conserved = lo.iter().chain(&hi).all(|m| m.mass().to_bits() == m0.to_bits());
    let variation_conserved = lo.iter().chain(&hi).all(|m| m.total_variation().to_bits() == v0.to_bits());

    let rho = hi
        .iter()
        .zip(&lo)
        .map(|(a, b)| a.difference(b))
        .collect::<Result<Vec<_>, _>>()?;
    let w_refine = hi
        .par_iter()
        .zip(&lo)
        .map(|(a, b)| reference_w_signed(a, b))
        .collect::<Result<Vec<_>, _>>()?;

    let mut reports = Vec::new();
    let mut levels = Vec::new();
    let mut plans = Vec::new();
    for &k in &cfg.diagnostics.k {
        let d = &cfg.diagnostics;
        let cutoff = build_cutoff(&field.growth, k)?;
        let c_omega_k = field.c_omega(cutoff.r_k + 1.0);
        let (total, outside) = variation_integrals(&times, &rho, k)?;
        let (i_total, i_k) = (*total.last().unwrap(), *outside.last().unwrap());
        let (alpha, beta, delta, schedule) = match d.mode {
            ParameterMode::Fixed => (d.alpha, d.beta, d.delta, None),
            ParameterMode::Schedule => {
                let s = parameter_schedule(k, i_total, i_k, c_omega_k, field.c_growth, &field.modulus, &field.growth)?;
                (s.alpha, s.beta, s.delta, Some(s))
            }
        };
        let setup = EstimateSetup::new(&field, k, alpha, beta, delta)?;
        let bounds = setup.bound_series(&times, &rho)?;
        let solved = rho.par_iter().map(|r| setup.solve(r)).collect::<Result<Vec<_>, _>>()?;
        let rows: Vec<ReportRow> = (0..times.len())
            .map(|i| ReportRow {
                t: times[i],
                d: solved[i].1.primal,
                term1: bounds[i].term1,
                term2: bounds[i].term2,
                term3: bounds[i].term3,
                bound: bounds[i].bound,
                w_refine: w_refine[i],
                mass: lo[i].mass(),
            })
            .collect();
        let d_within_bound = rows.iter().all(|r| r.within_bound(BOUND_SLACK));
        let max_d_over_bound = rows
            .iter()
            .filter(|r| r.bound > 0.0)
            .map(|r| r.d / r.bound)
            .fold(0.0, f64::max);

        let (pair, sol) = solved.last().expect("grid has at least two times");
        let w_final = reference_w(pair)?;
        let mut comparison = Vec::new();
        for eps in [0.1, 0.01] {
            match comparison_bound(sol.primal, eps, &setup.cost, pair.mass()) {
                Ok(b) => comparison.push(ComparisonCheck { eps, w: w_final, bound: Some(b), holds: w_final <= b * (1.0 + 1e-12) + 1e-15 }),
                Err(TransportError::ComparisonInapplicable { .. }) => {
                    comparison.push(ComparisonCheck { eps, w: w_final, bound: None, holds: true })
                }
                Err(e) => return Err(e.into()),
            }
        }
        let sampling = ModulusSampling { t_samples: 3, pair_samples: 3000, time_horizon: cfg.horizon, seed: cfg.seed };
        let c_omega_k_estimate = estimate_modulus_constant(&field, cutoff.r_k + 1.0, &sampling)?;
        let schedule_terms = match &schedule {
            Some(s) => Some(s.recheck(i_total, s.i_k, c_omega_k, field.c_growth, &field.modulus, &field.growth)?),
            None => None,
        };
        levels.push(LevelSummary {
            k,
            r_k: cutoff.r_k,
            alpha,
            beta,
            delta,
            c_omega_k,
            c_omega_k_estimate,
            c_growth: field.c_growth,
            schedule_terms,
            c_at_one: setup.cost.eval(1.0),
            max_d_over_bound,
            d_within_bound,
            comparison,
        });
        plans.push((k, PlanDoc::from(sol)));
        reports.push((k, rows));
    }

    let weak_residual = weak_solution_residual(&field, &times, &lo, &default_bank(&rho0, cfg.horizon))?;
    let passed = mass_conserved
        && variation_conserved
        && levels.iter().all(|l| {
            l.d_within_bound
                && l.comparison.iter().all(|c| c.holds)
                && l.schedule_terms.is_none_or(|t| t.iter().all(|&v| v <= 1.0 + 1e-9))
        });
    let summary = RunSummary {
        name: cfg.name.clone(),
        field: field.key.clone(),
        atoms: rho0.len(),
        grid: times.len(),
        seed: cfg.seed,
        mass_initial: m0,
        mass_conserved,
        variation_conserved,
        frozen: frozen.iter().enumerate().filter_map(|(i, f)| f.map(|t| (i, t))).collect(),
        max_w_refine: w_refine.iter().copied().fold(0.0, f64::max),
        weak_residual,
        levels,
        passed,
    };

    let mut files = Vec::new();
    if let Some(dir) = out_dir.map(Path::to_path_buf).or_else(|| cfg.out.clone()) {
        for (k, rows) in &reports {
            let path = match format {
                OutputFormat::Csv => dir.join(format!("report_k{k}.csv")),
                OutputFormat::Json => dir.join(format!("report_k{k}.json")),
            };
            match format {
                OutputFormat::Csv => write_atomic(&path, report_csv(rows).as_bytes())?,
                OutputFormat::Json => write_json(&path, rows)?,
            }
            files.push(path);
        }
        for (k, plan) in &plans {
            let path = dir.join(format!("plan_k{k}.json"));
            write_json(&path, plan)?;
            files.push(path);
        }
        for (name, m) in [("rho0.json", &rho0), ("rhoT.json", lo.last().unwrap())] {
            let path = dir.join(name);
            write_measure(&path, m)?;
            files.push(path);
        }
        for (i, a) in rho0.atoms().iter().take(DUMPED_TRAJECTORIES).enumerate() {
            let traj = integrate_flow(&field, &a.location, 0.0, cfg.horizon, &opts)?;
            let path = dir.join(format!("trajectory_{i}.csv"));
            write_atomic(&path, trajectory_csv(&traj).as_bytes())?;
            files.push(path);
        }
        let path = dir.join("summary.json");
        write_json(&path, &summary)?;
        files.push(path);
    }
    Ok(RunOutcome { reports, summary, files })
}
