//! The localized cost functional D(t) and its a-priori bound.
//!
//! For a signed ρ_t (typically the difference of two numerical solutions
//! of the same datum), μ and ν are the positive and negative parts of
//! χ_k·(η_α ∗ ρ_t), topped up at ◊ so that their masses agree; D(t) is the
//! optimal transport value between them for the cost c_{β,δ}.

use crate::cost::{unit_cost_at_infinity, ConcaveCost};
use crate::fields::{Modulus, VectorFieldSpec};
use crate::measure::{balance_with_reservoir, jordan_decompose, Atom, AtomicSignedMeasure, BalancedPair};
use crate::numeric::norm;
use crate::transport::{solve_ot, OtSolution};

use super::cutoff::{build_cutoff, CutoffFamily};
use super::mollify::{mollify, MollifierSpec};
use super::DiagnosticsError;

/// μ_{α,k}, ν_{α,k} from ρ_t.
pub fn build_mu_nu(
    rho: &AtomicSignedMeasure,
    cutoff: &CutoffFamily,
    spec: &MollifierSpec,
) -> Result<BalancedPair, DiagnosticsError> {
    let smooth = mollify(rho, spec)?;
    let atoms = smooth
        .atoms()
        .iter()
        .map(|a| Atom::new(a.location.clone(), a.weight * cutoff.chi(&a.location)))
        .collect();
    let cut = AtomicSignedMeasure::new(rho.dimension(), atoms, 0.0)?;
    let (pos, neg) = jordan_decompose(&cut);
    Ok(balance_with_reservoir(&pos, &neg)?)
}

/// The three terms of the bound and their sum.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BoundTerms {
    pub term1: f64,
    pub term2: f64,
    pub term3: f64,
    pub bound: f64,
}

/// Everything D(t) and its bound need for fixed (k, α, β, δ).
#[derive(Debug, Clone)]
pub struct EstimateSetup {
    pub k: u32,
    pub alpha: f64,
    pub beta: f64,
    pub delta: f64,
    pub cutoff: CutoffFamily,
    pub mollifier: MollifierSpec,
    pub cost: ConcaveCost,
    /// C_{ω,k}: the field's modulus constant on B(0, R_k + 1).
    pub c_omega_k: f64,
    pub c_growth: f64,
    /// ∫₀^∞ ds/(ω + δ).
    pub unit_cost_inf: f64,
    pub growth_at_k: f64,
    modulus: Modulus,
}

impl EstimateSetup {
    pub fn new(field: &VectorFieldSpec, k: u32, alpha: f64, beta: f64, delta: f64) -> Result<Self, DiagnosticsError> {
        let cutoff = build_cutoff(&field.growth, k)?;
        let mollifier = MollifierSpec::new(alpha);
        mollifier.validate()?;
        let cost = ConcaveCost::new(&field.modulus, beta, delta)?;
        let unit_cost_inf = unit_cost_at_infinity(&field.modulus, delta)?;
        Ok(Self {
            k,
            alpha,
            beta,
            delta,
            c_omega_k: field.c_omega(cutoff.r_k + 1.0),
            c_growth: field.c_growth,
            unit_cost_inf,
            growth_at_k: field.growth.eval(k as f64),
            modulus: field.modulus.tail_modified(),
            cutoff,
            mollifier,
            cost,
        })
    }

    pub fn pair(&self, rho: &AtomicSignedMeasure) -> Result<BalancedPair, DiagnosticsError> {
        build_mu_nu(rho, &self.cutoff, &self.mollifier)
    }

    pub fn solve(&self, rho: &AtomicSignedMeasure) -> Result<(BalancedPair, OtSolution), DiagnosticsError> {
        let pair = self.pair(rho)?;
        let sol = solve_ot(&pair, &self.cost)?;
        Ok((pair, sol))
    }

    /// D(t) for one ρ_t.
    pub fn d_value(&self, rho: &AtomicSignedMeasure) -> Result<f64, DiagnosticsError> {
        Ok(self.solve(rho)?.1.primal)
    }

    /// Bound terms from the time integrals I = ∫|ρ_t|(ℝⁿ)dt and
    /// I_out = ∫|ρ_t|(ℝⁿ∖B(0,k−1))dt.
    pub fn terms(&self, total: f64, outside: f64) -> BoundTerms {
        let b = self.beta;
        let term1 = b * self.c_omega_k * total;
        let term2 = 2.0 * b * self.c_growth * self.unit_cost_inf * outside;
        let term3 = self.c_omega_k
            * self.modulus.eval(self.alpha)
            * (b / self.delta + b / self.growth_at_k * self.unit_cost_inf)
            * total;
        BoundTerms { term1, term2, term3, bound: term1 + term2 + term3 }
    }

    /// Cumulative bound at every grid time (trapezoid in time).
    pub fn bound_series(&self, times: &[f64], rho: &[AtomicSignedMeasure]) -> Result<Vec<BoundTerms>, DiagnosticsError> {
        let (total, outside) = variation_integrals(times, rho, self.k)?;
        Ok(total.iter().zip(&outside).map(|(&a, &b)| self.terms(a, b)).collect())
    }
}

/// Running trapezoid integrals of |ρ_t|(ℝⁿ) and |ρ_t|(ℝⁿ∖B(0,k−1)).
pub fn variation_integrals(
    times: &[f64],
    rho: &[AtomicSignedMeasure],
    k: u32,
) -> Result<(Vec<f64>, Vec<f64>), DiagnosticsError> {
    if times.len() != rho.len() || times.is_empty() {
        return Err(DiagnosticsError::BadParameter(format!(
            "{} grid times for {} measures",
            times.len(),
            rho.len()
        )));
    }
    let inner = k as f64 - 1.0;
    let tv: Vec<f64> = rho.iter().map(|m| m.total_variation()).collect();
    let out: Vec<f64> = rho.iter().map(|m| m.variation_where(|x| norm(x) >= inner)).collect();
    let mut total = vec![0.0];
    let mut outside = vec![0.0];
    for i in 1..times.len() {
        let dt = times[i] - times[i - 1];
        total.push(total[i - 1] + 0.5 * dt * (tv[i] + tv[i - 1]));
        outside.push(outside[i - 1] + 0.5 * dt * (out[i] + out[i - 1]));
    }
    Ok((total, outside))
}

/// D_{α,β,δ,k} for one ρ_t.
pub fn d_functional(
    field: &VectorFieldSpec,
    rho: &AtomicSignedMeasure,
    k: u32,
    alpha: f64,
    beta: f64,
    delta: f64,
) -> Result<f64, DiagnosticsError> {
    EstimateSetup::new(field, k, alpha, beta, delta)?.d_value(rho)
}

/// The bound on D at the last grid time.
pub fn costestimate_bound(
    field: &VectorFieldSpec,
    times: &[f64],
    rho: &[AtomicSignedMeasure],
    k: u32,
    alpha: f64,
    beta: f64,
    delta: f64,
) -> Result<BoundTerms, DiagnosticsError> {
    let s = EstimateSetup::new(field, k, alpha, beta, delta)?;
    Ok(*s.bound_series(times, rho)?.last().expect("nonempty grid"))
}

/// ρ_t(ℝⁿ).
pub fn mass_balance(rho: &AtomicSignedMeasure) -> f64 {
    rho.mass()
}
