//! Radial cutoffs χ_k adapted to a growth envelope G.
//!
//! The raw profile is χ̃(r) = max{0, 1 − ∫_k^r ds/G(s)} for r ≥ k and 1
//! below. It is smoothed with a one-sided bump supported in [0, σ]:
//! χ_k(r) = ∫₀^σ χ̃(r − s) η_σ(s) ds, which keeps χ_k = 1 on B(0,k) and
//! χ_k = 0 outside B(0, R_k + σ) exactly, and gives
//! |χ_k′(r)| ≤ 1/G(r − σ) ≤ 2/G(r) for G = 1 + s and σ ≤ 1/2.

use crate::fields::GrowthEnvelope;
use crate::numeric::bisect_increasing;
use crate::quadrature::{gk15, integrate, integrate_breaks, QuadOptions};

use super::DiagnosticsError;

/// Largest admissible R_k.
pub const MAX_CUTOFF_RADIUS: f64 = 1e9;
const PHI_PANELS: usize = 4096;
const GRADIENT_SAMPLES: usize = 512;

#[derive(Debug, Clone)]
pub struct CutoffFamily {
    pub k: u32,
    /// Radius where the unsmoothed profile reaches 0.
    pub r_k: f64,
    pub sigma: f64,
    growth: GrowthEnvelope,
    // ∫_k^r ds/G on a uniform grid over [k, R_k]
    phi: Vec<f64>,
    phi_step: f64,
    kernel_norm: f64,
}

/// exp(−1/(1 − u²)) on (−1, 1).
fn bump(u: f64) -> f64 {
    if u.abs() >= 1.0 { 0.0 } else { (-1.0 / (1.0 - u * u)).exp() }
}

impl CutoffFamily {
    fn growth_at(&self, r: f64) -> f64 {
        self.growth.eval(r)
    }

    /// Raw profile χ̃ via cubic Hermite on the tabulated integral.
    pub fn raw_profile(&self, r: f64) -> f64 {
        let k = self.k as f64;
        if r <= k {
            return 1.0;
        }
        if r >= self.r_k {
            return 0.0;
        }
        let x = (r - k) / self.phi_step;
        let i = (x.floor() as usize).min(self.phi.len() - 2);
        let h = self.phi_step;
        let (r0, r1) = (k + i as f64 * h, k + (i + 1) as f64 * h);
        let t = (r - r0) / h;
        let (p0, p1) = (self.phi[i], self.phi[i + 1]);
        let (d0, d1) = (1.0 / self.growth_at(r0), 1.0 / self.growth_at(r1));
        let t2 = t * t;
        let t3 = t2 * t;
        let phi = (2.0 * t3 - 3.0 * t2 + 1.0) * p0
            + (t3 - 2.0 * t2 + t) * h * d0
            + (-2.0 * t3 + 3.0 * t2) * p1
            + (t3 - t2) * h * d1;
        (1.0 - phi).clamp(0.0, 1.0)
    }

    fn kernel(&self, s: f64) -> f64 {
        bump(2.0 * s / self.sigma - 1.0) / self.kernel_norm
    }

    /// The part of [0, σ] split at the kinks of χ̃(r − s).
    fn breaks(&self, r: f64) -> Vec<f64> {
        let mut b = vec![0.0];
        for kink in [r - self.r_k, r - self.k as f64] {
            if kink > 0.0 && kink < self.sigma {
                b.push(kink);
            }
        }
        b.push(self.sigma);
        b.sort_by(f64::total_cmp);
        b
    }

    /// χ_k as a function of |x|.
    pub fn radial(&self, r: f64) -> f64 {
        if r <= self.k as f64 {
            return 1.0;
        }
        if r >= self.r_k + self.sigma {
            return 0.0;
        }
        let opts = QuadOptions { abs_tol: 1e-13, rel_tol: 1e-12, max_intervals: 200 };
        let v = integrate_breaks(|s| self.raw_profile(r - s) * self.kernel(s), &self.breaks(r), &opts)
            .map(|q| q.value)
            .unwrap_or(f64::NAN);
        v.clamp(0.0, 1.0)
    }

    /// dχ_k/dr.
    pub fn radial_derivative(&self, r: f64) -> f64 {
        let k = self.k as f64;
        if r <= k || r >= self.r_k + self.sigma {
            return 0.0;
        }
        let opts = QuadOptions { abs_tol: 1e-13, rel_tol: 1e-12, max_intervals: 200 };
        let g = |s: f64| {
            let q = r - s;
            if q > k && q < self.r_k { -self.kernel(s) / self.growth_at(q) } else { 0.0 }
        };
        integrate_breaks(g, &self.breaks(r), &opts).map(|q| q.value).unwrap_or(f64::NAN)
    }

    pub fn chi(&self, x: &[f64]) -> f64 {
        self.radial(crate::numeric::norm(x))
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let r = crate::numeric::norm(x);
        let d = self.radial_derivative(r);
        if d == 0.0 {
            return vec![0.0; x.len()];
        }
        x.iter().map(|c| d * c / r).collect()
    }

    /// Outer edge of the support.
    pub fn support_radius(&self) -> f64 {
        self.r_k + self.sigma
    }

    /// Worst ratio |χ_k′(r)|·G(r)/2 over a uniform radial grid.
    pub fn gradient_bound_ratio(&self) -> (f64, f64) {
        let k = self.k as f64;
        let span = self.support_radius() - k;
        (0..=GRADIENT_SAMPLES)
            .map(|i| {
                let r = k + span * i as f64 / GRADIENT_SAMPLES as f64;
                (r, self.radial_derivative(r).abs() * self.growth_at(r) / 2.0)
            })
            .fold((k, 0.0), |a, b| if b.1 > a.1 { b } else { a })
    }
}

/// χ_k for growth envelope `g`.
pub fn build_cutoff(g: &GrowthEnvelope, k: u32) -> Result<CutoffFamily, DiagnosticsError> {
    if k == 0 {
        return Err(DiagnosticsError::BadParameter("cutoff index k must be >= 1".into()));
    }
    let kf = k as f64;
    let phi_to = |r: f64| g.inverse_integral(kf, r);
    let mut hi = kf + 1.0;
    loop {
        if phi_to(hi)? >= 1.0 {
            break;
        }
        if hi >= MAX_CUTOFF_RADIUS {
            return Err(DiagnosticsError::GrowthTooHeavy { k });
        }
        hi = (hi * 2.0).min(MAX_CUTOFF_RADIUS);
    }
    let lo = if hi > kf + 1.0 { hi / 2.0 } else { kf };
    let mut failure = None;
    let r_k = bisect_increasing(
        |r| match phi_to(r) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        1.0,
        lo,
        hi,
        1e-13 * hi,
    );
    if let Some(e) = failure {
        return Err(e.into());
    }
    let sigma = (0.5f64).min((r_k - kf) / 8.0);

    let phi_step = (r_k - kf) / PHI_PANELS as f64;
    let mut phi = Vec::with_capacity(PHI_PANELS + 1);
    phi.push(0.0);
    let mut acc = 0.0;
    let mut inv_g = |s: f64| 1.0 / g.eval(s);
    for i in 0..PHI_PANELS {
        let a = kf + i as f64 * phi_step;
        acc += gk15(&mut inv_g, a, a + phi_step)?.0;
        phi.push(acc);
    }
    let opts = QuadOptions { abs_tol: 1e-15, rel_tol: 1e-14, max_intervals: 200 };
    let kernel_norm = integrate(|s| bump(2.0 * s / sigma - 1.0), 0.0, sigma, &opts)?.value;

    let cutoff = CutoffFamily { k, r_k, sigma, growth: g.clone(), phi, phi_step, kernel_norm };
    let (r, ratio) = cutoff.gradient_bound_ratio();
    if !(ratio <= 1.0) {
        return Err(DiagnosticsError::GradientBound { r, gradient: 2.0 * ratio / g.eval(r), bound: 2.0 / g.eval(r) });
    }
    Ok(cutoff)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn affine_radius_closed_form() {
        let c = build_cutoff(&GrowthEnvelope::affine(), 1).unwrap();
        let exact = 2.0 * std::f64::consts::E - 1.0;
        assert!((c.r_k - exact).abs() < 1e-10, "{}", c.r_k);
        assert!((c.sigma - (exact - 1.0) / 8.0).abs() < 1e-11);
        // raw profile against ln((1+r)/(1+k))
        for r in [1.3, 2.0, 3.7, 4.4] {
            let want = (1.0 - ((1.0 + r) / 2.0f64).ln()).max(0.0);
            assert!((c.raw_profile(r) - want).abs() < 1e-12);
        }
    }

    #[test]
    fn plateau_and_support() {
        let c = build_cutoff(&GrowthEnvelope::affine(), 3).unwrap();
        assert_eq!(c.chi(&[0.0, 0.0]), 1.0);
        assert_eq!(c.chi(&[3.0, 0.0]), 1.0);
        assert_eq!(c.chi(&[0.0, c.support_radius()]), 0.0);
        assert_eq!(c.chi(&[1e6, 0.0]), 0.0);
        let mid = 0.5 * (3.0 + c.r_k);
        let v = c.radial(mid);
        assert!(v > 0.0 && v < 1.0);
    }

    #[test]
    fn derivative_matches_finite_differences() {
        let c = build_cutoff(&GrowthEnvelope::affine(), 2).unwrap();
        let h = 1e-5;
        for r in [2.1, 2.4, 0.5 * (2.0 + c.r_k), c.r_k - 0.1, c.r_k + 0.5 * c.sigma] {
            let fd = (c.radial(r + h) - c.radial(r - h)) / (2.0 * h);
            assert!((fd - c.radial_derivative(r)).abs() < 1e-6, "r={r}");
            assert!(fd.abs() <= 2.0 / (1.0 + r));
        }
    }

    #[test]
    fn heavy_tail_is_rejected() {
        // ∫^∞ ds/(1+s)² = 1/(1+k) < 1 never reaches 1
        let g = GrowthEnvelope::new(|s| (1.0 + s) * (1.0 + s), false, None);
        assert!(matches!(build_cutoff(&g, 1), Err(DiagnosticsError::GrowthTooHeavy { k: 1 })));
    }
}
