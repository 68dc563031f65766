//! Cutoffs, mollification, the cost functional D(t), its bound, the
//! parameter schedule, mass bookkeeping and weak-form residuals.

pub mod cutoff;
pub mod estimate;
pub mod mollify;
pub mod residual;
pub mod schedule;

use serde::Serialize;
use thiserror::Error;

use crate::cost::CostError;
use crate::fields::FieldError;
use crate::flow::FlowError;
use crate::measure::MeasureError;
use crate::quadrature::QuadratureError;
use crate::transport::TransportError;

pub use cutoff::{build_cutoff, CutoffFamily};
pub use estimate::{build_mu_nu, costestimate_bound, d_functional, mass_balance, BoundTerms, EstimateSetup};
pub use mollify::{mollify, MollifierSpec};
pub use residual::{weak_solution_residual, TestFunction};
pub use schedule::{parameter_schedule, Schedule};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiagnosticsError {
    #[error("G tail too heavy for numeric R_k (k = {k})")]
    GrowthTooHeavy { k: u32 },
    #[error("cutoff gradient {gradient:e} exceeds 2/G = {bound:e} at r = {r}")]
    GradientBound { r: f64, gradient: f64, bound: f64 },
    #[error("mollifier grid too coarse: cell {cell:e} > alpha/4 = {:e}", alpha / 4.0)]
    GridTooCoarse { cell: f64, alpha: f64 },
    #[error("measure carries reservoir mass {0}")]
    ReservoirPresent(f64),
    #[error("bisection bracket failure: {0}")]
    Bracket(String),
    #[error("invalid parameter: {0}")]
    BadParameter(String),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error(transparent)]
    Cost(#[from] CostError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Flow(#[from] FlowError),
}

/// One grid time of a diagnostics report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReportRow {
    pub t: f64,
    #[serde(rename = "D")]
    pub d: f64,
    pub term1: f64,
    pub term2: f64,
    pub term3: f64,
    pub bound: f64,
    #[serde(rename = "W_refine")]
    pub w_refine: f64,
    pub mass: f64,
}

impl ReportRow {
    pub const HEADER: [&'static str; 8] = ["t", "D", "term1", "term2", "term3", "bound", "W_refine", "mass"];

    pub fn values(&self) -> [f64; 8] {
        [self.t, self.d, self.term1, self.term2, self.term3, self.bound, self.w_refine, self.mass]
    }

    /// D ≤ bound up to a relative slack (and an absolute floor for D ≈ 0).
    pub fn within_bound(&self, rel_slack: f64) -> bool {
        self.d <= self.bound * (1.0 + rel_slack) + 1e-14
    }
}
