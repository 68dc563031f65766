//! The concave cost c_{β,δ}(r) = β∫₀ʳ ds/(ω′(s)+δ) with a tail-modified ω′,
//! and the reference cost min{r, 1}.
//!
//! A geometric knot table stores the cumulative integral; evaluation adds a
//! single Gauss–Kronrod panel over the remaining sub-piece. Beyond the last
//! knot the substitution u = 1/s turns the infinite tail into a finite
//! integral, so c(∞) carries no truncation error.

use thiserror::Error;

use crate::fields::modulus::{log_scale_integral, Modulus};
use crate::quadrature::{gk15, integrate, QuadOptions, QuadratureError};

pub const TABLE_KNOTS: usize = 4096;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CostError {
    #[error("cost parameters must be positive and finite (beta = {beta}, delta = {delta})")]
    BadParameters { beta: f64, delta: f64 },
    #[error("value outside cost range: {value} > c(inf) = {c_inf}")]
    OutOfRange { value: f64, c_inf: f64 },
    #[error("negative distance {0}")]
    NegativeDistance(f64),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

#[derive(Debug, Clone)]
pub struct ConcaveCost {
    omega: Modulus,
    beta: f64,
    delta: f64,
    knots: Vec<f64>,
    /// ∫₀^{knots[i]} ds/(ω′+δ), without the β factor.
    cumulative: Vec<f64>,
    /// ∫_{S}^∞ ds/(ω′+δ) with S the last knot.
    tail: f64,
    c_infinity: f64,
}

fn piece_opts() -> QuadOptions {
    QuadOptions { abs_tol: 1e-300, rel_tol: 1e-14, max_intervals: 200 }
}

impl ConcaveCost {
    /// Builds the table; `omega` is tail-modified above s = 1 (idempotently).
    pub fn new(omega: &Modulus, beta: f64, delta: f64) -> Result<Self, CostError> {
        Self::with_tail_scale(omega, beta, delta, 1.0)
    }

    /// As [`ConcaveCost::new`] with the quadratic tail starting at `scale`.
    pub fn with_tail_scale(omega: &Modulus, beta: f64, delta: f64, scale: f64) -> Result<Self, CostError> {
        if !(beta > 0.0 && beta.is_finite() && delta > 0.0 && delta.is_finite()) {
            return Err(CostError::BadParameters { beta, delta });
        }
        if !(scale >= 1.0 && scale.is_finite()) {
            return Err(CostError::BadParameters { beta, delta });
        }
        let omega = omega.tail_modified_at(scale);
        let wl = omega.eval(scale).max(f64::MIN_POSITIVE);
        // beyond S the quadratic tail gives ∫_S^∞ ≤ L²/(ω(L)S) ≤ 1e-12
        let s_max = (1e12 * scale * scale / wl).max(1e3 * scale);
        // below s_lo the integrand is within 0.1% of 1/δ
        let s_lo = omega.level_crossing(1e-3 * delta).min(1e-9);
        let decades = (s_max / s_lo).log10();
        let n = TABLE_KNOTS.max((64.0 * decades) as usize);
        let ratio = (s_max / s_lo).powf(1.0 / (n - 1) as f64);

        let mut knots = Vec::with_capacity(n + 1);
        knots.push(0.0);
        let mut s = s_lo;
        for _ in 0..n {
            knots.push(s);
            s *= ratio;
        }
        *knots.last_mut().expect("nonempty") = s_max;

        let g = |s: f64| 1.0 / (omega.eval(s) + delta);
        let opts = piece_opts();
        let mut cumulative = Vec::with_capacity(knots.len());
        cumulative.push(0.0);
        // Neumaier running sum of the pieces
        let (mut sum, mut comp) = (0.0f64, 0.0f64);
        for w in knots.windows(2) {
            let p = integrate(g, w[0], w[1], &opts)?.value;
            let t = sum + p;
            comp += if sum.abs() >= p.abs() { (sum - t) + p } else { (p - t) + sum };
            sum = t;
            cumulative.push(sum + comp);
        }
        let tail = upper_tail(&omega, delta, s_max, f64::INFINITY)?;
        let total = cumulative[cumulative.len() - 1] + tail;
        Ok(Self {
            omega,
            beta,
            delta,
            knots,
            cumulative,
            tail,
            c_infinity: beta * total,
        })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// The tail-modified modulus the cost is built from.
    pub fn modulus(&self) -> &Modulus {
        &self.omega
    }

    pub fn c_infinity(&self) -> f64 {
        self.c_infinity
    }

    /// Same table, different β (the cost is linear in β).
    pub fn with_beta(&self, beta: f64) -> Result<Self, CostError> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(CostError::BadParameters { beta, delta: self.delta });
        }
        Ok(Self {
            beta,
            c_infinity: beta * (self.cumulative[self.cumulative.len() - 1] + self.tail),
            ..self.clone()
        })
    }

    fn integrand(&self, s: f64) -> f64 {
        1.0 / (self.omega.eval(s) + self.delta)
    }

    fn s_max(&self) -> f64 {
        self.knots[self.knots.len() - 1]
    }

    /// ∫₀ʳ ds/(ω′+δ) without β.
    fn unit_integral(&self, r: f64) -> Result<f64, CostError> {
        if r.is_nan() || r < 0.0 {
            return Err(CostError::NegativeDistance(r));
        }
        if r == 0.0 {
            return Ok(0.0);
        }
        let last = self.cumulative.len() - 1;
        if r == f64::INFINITY {
            return Ok(self.cumulative[last] + self.tail);
        }
        if r >= self.s_max() {
            let head = upper_tail(&self.omega, self.delta, self.s_max(), r)?;
            return Ok(self.cumulative[last] + head);
        }
        // knots[i] <= r < knots[i+1]
        let i = self.knots.partition_point(|&k| k <= r) - 1;
        let a = self.knots[i];
        if r == a {
            return Ok(self.cumulative[i]);
        }
        let mut g = |s: f64| self.integrand(s);
        let (v, _) = gk15(&mut g, a, r)?;
        Ok(self.cumulative[i] + v)
    }

    /// c(r); `r = +∞` gives c(∞).
    pub fn cost(&self, r: f64) -> Result<f64, CostError> {
        Ok(self.beta * self.unit_integral(r)?)
    }

    /// c(r) for finite validated distances; panics only on negative input.
    pub fn eval(&self, r: f64) -> f64 {
        self.cost(r).expect("distance must be nonnegative")
    }

    /// c′(r) = β/(ω′(r)+δ).
    pub fn derivative(&self, r: f64) -> f64 {
        self.beta / (self.omega.eval(r.max(0.0)) + self.delta)
    }

    /// r with |c(r) − v| ≤ 1e-12·max(1, v); `v = c(∞)` gives +∞.
    pub fn inverse(&self, v: f64) -> Result<f64, CostError> {
        if v.is_nan() || v < 0.0 {
            return Err(CostError::NegativeDistance(v));
        }
        if v > self.c_infinity {
            return Err(CostError::OutOfRange { value: v, c_inf: self.c_infinity });
        }
        if v == 0.0 {
            return Ok(0.0);
        }
        if v == self.c_infinity {
            return Ok(f64::INFINITY);
        }
        let target = v / self.beta;
        let tol = 1e-12 * v.max(1.0) / self.beta;
        let last = self.cumulative.len() - 1;
        if target >= self.cumulative[last] {
            // invert the tail on u = 1/r by bisection
            let need = target - self.cumulative[last];
            let (mut lo, mut hi) = (0.0f64, 1.0 / self.s_max()); // u range, tail(u) decreasing in u
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                let val = upper_tail(&self.omega, self.delta, self.s_max(), 1.0 / mid)?;
                if val > need {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if (val - need).abs() <= tol {
                    return Ok(1.0 / mid);
                }
            }
            return Ok(1.0 / (0.5 * (lo + hi)));
        }
        let i = self.cumulative.partition_point(|&c| c <= target) - 1;
        let (mut lo, mut hi) = (self.knots[i], self.knots[i + 1]);
        let mut r = if self.cumulative[i + 1] > self.cumulative[i] {
            lo + (hi - lo) * (target - self.cumulative[i]) / (self.cumulative[i + 1] - self.cumulative[i])
        } else {
            0.5 * (lo + hi)
        };
        for _ in 0..100 {
            let f = self.unit_integral(r)? - target;
            if f.abs() <= tol {
                return Ok(r);
            }
            if f > 0.0 {
                hi = r;
            } else {
                lo = r;
            }
            let newton = r - f / self.integrand(r);
            r = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
            if hi - lo <= f64::EPSILON * hi {
                break;
            }
        }
        Ok(r)
    }

    /// The finite knot table `(r, c(r))`, excluding r = 0.
    pub fn table(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.knots
            .iter()
            .zip(&self.cumulative)
            .skip(1)
            .map(|(&r, &c)| (r, self.beta * c))
    }
}

/// ∫_a^b ds/(ω′(s)+δ) for `1 <= a < b <= ∞`, computed in u = 1/s.
fn upper_tail(omega: &Modulus, delta: f64, a: f64, b: f64) -> Result<f64, CostError> {
    let u_hi = 1.0 / a;
    let u_lo = if b.is_infinite() { 0.0 } else { 1.0 / b };
    if u_hi <= u_lo {
        return Ok(0.0);
    }
    let opts = QuadOptions { abs_tol: 1e-16, rel_tol: 1e-13, max_intervals: 500 };
    let h = |u: f64| {
        let s = 1.0 / u;
        1.0 / (u * u * omega.eval(s) + u * u * delta)
    };
    Ok(integrate(h, u_lo, u_hi, &opts)?.value)
}

/// ∫₀^∞ ds/(ω′(s)+δ) for the tail-modified ω′, without building a table.
pub fn unit_cost_at_infinity(omega: &Modulus, delta: f64) -> Result<f64, CostError> {
    unit_cost_up_to(omega, delta, f64::INFINITY)
}

/// ∫₀ʳ ds/(ω′(s)+δ) without building a table.
pub fn unit_cost_up_to(omega: &Modulus, delta: f64, r: f64) -> Result<f64, CostError> {
    if !(delta > 0.0) {
        return Err(CostError::BadParameters { beta: 1.0, delta });
    }
    let omega = omega.tail_modified();
    let s_lo = omega.level_crossing(1e-3 * delta).min(1e-9);
    let s_max = (1e12 / omega.eval(1.0).max(f64::MIN_POSITIVE)).max(1e3);
    let opts = QuadOptions { abs_tol: 1e-300, rel_tol: 1e-13, max_intervals: 4000 };
    let g = |s: f64| 1.0 / (omega.eval(s) + delta);
    let top = r.min(s_max);
    let head = integrate(g, 0.0, s_lo.min(top), &opts)?.value;
    let mid = if top > s_lo { log_scale_integral(g, s_lo, top, &opts)? } else { 0.0 };
    let tail = if r > s_max { upper_tail(&omega, delta, s_max, r)? } else { 0.0 };
    Ok(head + mid + tail)
}

/// min{r, 1}, with r = +∞ ↦ 1.
pub fn reference_cost(r: f64) -> f64 {
    r.min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn lin() -> ConcaveCost {
        ConcaveCost::new(&Modulus::linear(), 1.0, 1.0).unwrap()
    }

    // tail starting at 2, so ln(1 + r) holds up to r = e − 1
    fn lin_late_tail() -> ConcaveCost {
        ConcaveCost::with_tail_scale(&Modulus::linear(), 1.0, 1.0, 2.0).unwrap()
    }

    #[test]
    fn linear_modulus_closed_form() {
        let c = lin();
        assert_eq!(c.eval(0.0), 0.0);
        for r in [1e-12, 1e-6, 0.3, 1.0] {
            assert!((c.eval(r) - r.ln_1p()).abs() < 1e-12 * r.ln_1p().max(1e-300) + 1e-16, "{r}");
        }
        // quadratic tail: ∫₁ʳ ds/(s²+1) = atan r − π/4
        let r = 3.5f64;
        let exact = 2f64.ln() + r.atan() - std::f64::consts::FRAC_PI_4;
        assert!((c.eval(r) - exact).abs() < 1e-12);
        assert!((lin_late_tail().eval(E - 1.0) - 1.0).abs() < 1e-10);
        // ∫₀¹ ds/(s+1) + ∫₁^∞ ds/(s²+1) = ln 2 + π/4
        let exact = 2f64.ln() + std::f64::consts::FRAC_PI_4;
        assert!((c.c_infinity() - exact).abs() < 1e-11, "{}", c.c_infinity());
        assert_eq!(c.cost(f64::INFINITY).unwrap(), c.c_infinity());
    }

    #[test]
    fn inverse_examples() {
        let c = lin();
        assert_eq!(c.inverse(0.0).unwrap(), 0.0);
        assert!((lin_late_tail().inverse(1.0).unwrap() - (E - 1.0)).abs() < 1e-11);
        let v = 2f64.ln() + 0.25;
        assert!((c.inverse(v).unwrap() - (0.25 + std::f64::consts::FRAC_PI_4).tan()).abs() < 1e-11);
        assert!(matches!(c.inverse(c.c_infinity() * 1.01), Err(CostError::OutOfRange { .. })));
        let v = c.eval(5e12);
        let r = c.inverse(v).unwrap();
        assert!((c.eval(r) - v).abs() <= 1e-12);
    }

    #[test]
    fn derivative_examples() {
        let c = lin();
        assert_eq!(c.derivative(1.0), 0.5);
        assert_eq!(c.derivative(0.0), 1.0);
        let h = 1e-5;
        let fd = (c.eval(0.3 + h) - c.eval(0.3 - h)) / (2.0 * h);
        assert!((fd - c.derivative(0.3)).abs() < 1e-6);
    }

    #[test]
    fn table_is_concave_and_lipschitz() {
        let c = ConcaveCost::new(&Modulus::log_lipschitz(), 1.0, 0.1).unwrap();
        let t: Vec<(f64, f64)> = std::iter::once((0.0, 0.0)).chain(c.table()).collect();
        let lip = c.beta() / c.delta();
        let mut prev_slope = f64::INFINITY;
        for w in t.windows(2).filter(|w| w[1].0 <= 1e4) {
            let slope = (w[1].1 - w[0].1) / (w[1].0 - w[0].0);
            assert!(slope <= lip * (1.0 + 1e-12));
            assert!(slope <= prev_slope * (1.0 + 1e-9));
            prev_slope = slope;
        }
    }

    #[test]
    fn tiny_delta_is_supported() {
        let w = Modulus::linear();
        let c = ConcaveCost::new(&w, 1.0, 1e-40).unwrap();
        // ∫₀¹ ds/(s+δ) = ln(1+1/δ)
        let exact = (1.0 + 1e40f64).ln();
        assert!((c.eval(1.0) - exact).abs() < 1e-10 * exact);
        let j = unit_cost_at_infinity(&w, 1e-40).unwrap();
        assert!((j - c.c_infinity()).abs() < 1e-10 * j);
    }

    #[test]
    fn reference_cost_examples() {
        assert_eq!(reference_cost(0.0), 0.0);
        assert_eq!(reference_cost(0.5), 0.5);
        assert_eq!(reference_cost(f64::INFINITY), 1.0);
    }
}
