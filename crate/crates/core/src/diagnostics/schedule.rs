//! (β_k, δ_k, α_k) chosen so that each term of the cost bound is at most 1.
//!
//! With A = C_{ω,k}·I + 1:
//! β = 1/A; δ solves ∫₀^∞ ds/(ω+δ) = A/(2(C_G+1)·I_k); α is the largest
//! 2^{−j} with ω(α) ≤ 1/[(β/δ + β/G(k)·∫₀^∞ ds/(ω+δ))·A].

use crate::cost::{unit_cost_at_infinity, unit_cost_up_to};
use crate::fields::{GrowthEnvelope, Modulus};

use super::DiagnosticsError;

/// Bracket for δ, in powers of ten.
const LOG10_DELTA_MIN: f64 = -300.0;
const LOG10_DELTA_MAX: f64 = 12.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    pub k: u32,
    pub beta: f64,
    pub delta: f64,
    pub alpha: f64,
    /// α = 2^{−alpha_exponent}.
    pub alpha_exponent: i32,
    /// I_k after flooring at 1/k.
    pub i_k: f64,
    pub unit_cost_inf: f64,
    /// c_k(1) = β∫₀¹ ds/(ω+δ).
    pub c_at_one: f64,
}

impl Schedule {
    /// The three bound terms re-evaluated from scratch with these parameters.
    pub fn recheck(&self, i_total: f64, i_k: f64, c_omega_k: f64, c_growth: f64, omega: &Modulus, growth: &GrowthEnvelope) -> Result<[f64; 3], DiagnosticsError> {
        let j = unit_cost_at_infinity(omega, self.delta)?;
        let b = self.beta;
        let t1 = b * c_omega_k * i_total;
        let t2 = 2.0 * b * c_growth * j * i_k;
        let t3 = c_omega_k * omega.tail_modified().eval(self.alpha) * (b / self.delta + b / growth.eval(self.k as f64) * j) * i_total;
        Ok([t1, t2, t3])
    }
}

/// Parameters for level `k` given I = ∫|ρ_t|dt and I_k = ∫|ρ_t|(ℝⁿ∖B(0,k−1))dt.
pub fn parameter_schedule(
    k: u32,
    i_total: f64,
    i_k: f64,
    c_omega_k: f64,
    c_growth: f64,
    omega: &Modulus,
    growth: &GrowthEnvelope,
) -> Result<Schedule, DiagnosticsError> {
    if k == 0 || !(i_total >= 0.0) || !(i_k >= 0.0) || !(c_omega_k >= 0.0) || !(c_growth >= 0.0) {
        return Err(DiagnosticsError::BadParameter(format!(
            "schedule needs k >= 1 and nonnegative I, I_k, constants (k={k}, I={i_total}, I_k={i_k})"
        )));
    }
    let i_k = i_k.max(1.0 / k as f64);
    let a = c_omega_k * i_total + 1.0;
    let beta = 1.0 / a;
    let target = a / (2.0 * (c_growth + 1.0) * i_k);

    // J(δ) is decreasing; bisect on log10 δ keeping J(hi) <= target
    let j = |log_delta: f64| unit_cost_at_infinity(omega, 10f64.powf(log_delta));
    let (mut lo, mut hi) = (LOG10_DELTA_MIN, LOG10_DELTA_MAX);
    let (j_lo, j_hi) = (j(lo)?, j(hi)?);
    if !(j_lo >= target && j_hi <= target) {
        return Err(DiagnosticsError::Bracket(format!(
            "k={k}: need ∫ds/(ω+δ) = {target:.6e}, reachable range over δ ∈ [1e{LOG10_DELTA_MIN}, 1e{LOG10_DELTA_MAX}] is [{j_hi:.6e}, {j_lo:.6e}]"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo < 1e-13 {
            break;
        }
        if j(mid)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let delta = 10f64.powf(hi);
    let unit_cost_inf = unit_cost_at_infinity(omega, delta)?;

    let threshold = 1.0 / ((beta / delta + beta / growth.eval(k as f64) * unit_cost_inf) * a);
    let w = omega.tail_modified();
    let mut alpha_exponent = 1;
    loop {
        let alpha = 0.5f64.powi(alpha_exponent);
        if alpha == 0.0 {
            return Err(DiagnosticsError::Bracket(format!("k={k}: no α = 2^-j with ω(α) <= {threshold:e}")));
        }
        if w.eval(alpha) <= threshold {
            break;
        }
        alpha_exponent += 1;
    }
    let alpha = 0.5f64.powi(alpha_exponent);
    let c_at_one = beta * unit_cost_up_to(omega, delta, 1.0)?;
    Ok(Schedule { k, beta, delta, alpha, alpha_exponent, i_k, unit_cost_inf, c_at_one })
}

/// c_k(1) for ω(s) = s with the unit-scale tail ω′(s) = s² beyond 1, in
/// closed form with δ = e^{−λ}; usable where δ underflows in f64.
///
/// Uses ∫₀¹ ds/(s+δ) = ln(1 + 1/δ) and ∫₁^∞ ds/(s²+δ) = atan(√δ)/√δ.
pub fn linear_c_at_one_log(k: u32, i_total: f64, c_omega_k: f64, c_growth: f64) -> f64 {
    let a = c_omega_k * i_total + 1.0;
    let target = a * k as f64 / (2.0 * (c_growth + 1.0));
    // J(λ) = λ + ln(1 + e^{−λ}) + tail(λ), tail → 1 from below
    let tail = |lam: f64| {
        let sd = (-0.5 * lam).exp();
        if sd < 1e-8 { 1.0 - sd * sd / 3.0 } else { sd.atan() / sd }
    };
    let big_j = |lam: f64| lam + (-lam).exp().ln_1p() + tail(lam);
    let (mut lo, mut hi) = (-50.0f64, target + 50.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if big_j(mid) > target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let lam = hi;
    (lam + (-lam).exp().ln_1p()) / a
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_field_gets_unit_beta() {
        let s = parameter_schedule(2, 1.0, 0.0, 0.0, 1.0, &Modulus::linear(), &GrowthEnvelope::affine()).unwrap();
        assert_eq!(s.beta, 1.0);
        assert_eq!(s.i_k, 0.5);
    }

    #[test]
    fn terms_are_at_most_one() {
        let g = GrowthEnvelope::affine();
        // log-type moduli reach only small k before δ underflows
        for (om, c, ks) in [
            (Modulus::linear(), 1.0, &[2u32, 4, 16][..]),
            (Modulus::log_lipschitz(), 2.5, &[2][..]),
            (Modulus::iterated_log(1), 3.0, &[1][..]),
        ] {
            for &k in ks {
                let s = parameter_schedule(k, 0.8, 0.0, c, 1.0, &om, &g).unwrap();
                let t = s.recheck(0.8, 0.0, c, 1.0, &om, &g).unwrap();
                assert!(t.iter().all(|&v| v <= 1.0 + 1e-9), "{t:?}");
                assert!(s.alpha < 1.0 && s.delta > 0.0);
            }
        }
    }

    #[test]
    fn closed_form_matches_quadrature_path() {
        let g = GrowthEnvelope::affine();
        for k in [2, 8, 32] {
            let s = parameter_schedule(k, 1.0, 0.0, 1.0, 1.0, &Modulus::linear(), &g).unwrap();
            let closed = linear_c_at_one_log(k, 1.0, 1.0, 1.0);
            assert!((s.c_at_one - closed).abs() < 1e-9 * closed, "{} vs {closed}", s.c_at_one);
        }
    }
}
