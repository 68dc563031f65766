//! Moduli of continuity ω and growth envelopes G.

use std::fmt;
use std::sync::Arc;

use crate::quadrature::{integrate_breaks, QuadOptions, QuadratureError};

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A nondecreasing ω: [0,∞) → [0,∞) with ω(s) > 0 for s > 0.
#[derive(Clone)]
pub struct Modulus {
    f: ScalarFn,
    /// Asserts ∫₀ʳ ds/ω(s) = ∞.
    pub osgood: bool,
    pub tag: Option<String>,
}

impl fmt::Debug for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Modulus")
            .field("tag", &self.tag)
            .field("osgood", &self.osgood)
            .finish()
    }
}

impl Modulus {
    pub fn new<F: Fn(f64) -> f64 + Send + Sync + 'static>(f: F, osgood: bool, tag: Option<&str>) -> Self {
        Self {
            f: Arc::new(f),
            osgood,
            tag: tag.map(str::to_owned),
        }
    }

    #[inline]
    pub fn eval(&self, s: f64) -> f64 {
        (self.f)(s)
    }

    /// ω(s) = s.
    pub fn linear() -> Self {
        Self::new(|s| s, true, Some("linear"))
    }

    /// ω(s) = s·log(e + 1/s).
    pub fn log_lipschitz() -> Self {
        Self::new(
            |s| if s > 0.0 { s * (std::f64::consts::E + 1.0 / s).ln() } else { 0.0 },
            true,
            Some("log_lipschitz"),
        )
    }

    /// ω(s) = s·ln(1/s) up to 1/e, then constant 1/e.
    pub fn s_log_inv() -> Self {
        Self::new(
            |s| {
                let e_inv = (-1.0f64).exp();
                if s <= 0.0 {
                    0.0
                } else if s < e_inv {
                    -s * s.ln()
                } else {
                    e_inv
                }
            },
            true,
            Some("s_log_inv"),
        )
    }

    /// ω(s) = s·(1 + ln(1+1/s))·(1 + ln(1 + ln(1+1/s)))^p.
    ///
    /// `p = 1` is Osgood; `p = 2` is not.
    pub fn iterated_log(power: i32) -> Self {
        let tag = if power == 1 { "iterated_log" } else { "iterated_log_sq" };
        Self::new(
            move |s| {
                if s <= 0.0 {
                    return 0.0;
                }
                let l = (1.0 / s).ln_1p();
                s * (1.0 + l) * (1.0 + l.ln_1p()).powi(power)
            },
            power <= 1,
            Some(tag),
        )
    }

    /// ω′(s) = ω(s) on [0,1] and max(ω(s), ω(1)s²) beyond; idempotent.
    pub fn tail_modified(&self) -> Self {
        self.tail_modified_at(1.0)
    }

    /// ω′(s) = ω(s) on [0,L] and max(ω(s), ω(L)(s/L)²) beyond.
    pub fn tail_modified_at(&self, scale: f64) -> Self {
        if self.tag.as_deref().is_some_and(|t| t.contains("+tail")) {
            return self.clone();
        }
        let inner = self.f.clone();
        let wl = inner(scale);
        let tag = if scale == 1.0 {
            format!("{}+tail", self.tag.as_deref().unwrap_or("custom"))
        } else {
            format!("{}+tail@{scale}", self.tag.as_deref().unwrap_or("custom"))
        };
        Self {
            f: Arc::new(move |s| {
                let w = inner(s);
                if s > scale {
                    let q = s / scale;
                    w.max(wl * q * q)
                } else {
                    w
                }
            }),
            osgood: self.osgood,
            tag: Some(tag),
        }
    }

    /// Smallest `s` on a geometric scan with ω(s) ≥ `level`, refined by bisection.
    pub fn level_crossing(&self, level: f64) -> f64 {
        let mut hi = 1.0;
        while self.eval(hi) < level && hi < 1e300 {
            hi *= 2.0;
        }
        let mut lo = hi;
        while self.eval(lo) >= level && lo > 1e-300 {
            lo *= 0.5;
        }
        if self.eval(lo) >= level {
            return lo;
        }
        crate::numeric::bisect_increasing(|s| self.eval(s), level, lo, hi, 0.0)
    }
}

/// Breakpoints of a geometric decade grid covering `[lo, hi]`.
pub(crate) fn decade_breaks(lo: f64, hi: f64) -> Vec<f64> {
    let mut b = vec![lo];
    let mut x = 10f64.powf(lo.log10().floor() + 1.0);
    while x < hi {
        if x > lo * (1.0 + 1e-12) {
            b.push(x);
        }
        x *= 10.0;
    }
    b.push(hi);
    b
}

/// ∫_{lo}^{hi} g(s) ds for positive `lo`, integrated in log s on decade panels.
pub(crate) fn log_scale_integral<F: Fn(f64) -> f64>(
    g: F,
    lo: f64,
    hi: f64,
    opts: &QuadOptions,
) -> Result<f64, QuadratureError> {
    let breaks: Vec<f64> = decade_breaks(lo, hi).into_iter().map(f64::ln).collect();
    Ok(integrate_breaks(|x| {
        let s = x.exp();
        s * g(s)
    }, &breaks, opts)?
    .value)
}

/// ∫_{r_low}^{r_high} ds/ω(s).
pub fn osgood_integral(m: &Modulus, r_low: f64, r_high: f64) -> Result<f64, QuadratureError> {
    if !(r_low > 0.0 && r_high > r_low) {
        return Err(QuadratureError::BadInterval { a: r_low, b: r_high });
    }
    let opts = QuadOptions { abs_tol: 1e-13, rel_tol: 1e-12, max_intervals: 2000 };
    log_scale_integral(|s| 1.0 / m.eval(s), r_low, r_high, &opts)
}

/// A continuous nondecreasing G > 0 with (asserted) ∫^∞ ds/G = ∞.
#[derive(Clone)]
pub struct GrowthEnvelope {
    f: ScalarFn,
    pub divergent_tail: bool,
    pub tag: Option<String>,
}

impl fmt::Debug for GrowthEnvelope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GrowthEnvelope")
            .field("tag", &self.tag)
            .field("divergent_tail", &self.divergent_tail)
            .finish()
    }
}

impl GrowthEnvelope {
    pub fn new<F: Fn(f64) -> f64 + Send + Sync + 'static>(f: F, divergent_tail: bool, tag: Option<&str>) -> Self {
        Self { f: Arc::new(f), divergent_tail, tag: tag.map(str::to_owned) }
    }

    /// G(s) = 1 + s.
    pub fn affine() -> Self {
        Self::new(|s| 1.0 + s, true, Some("affine"))
    }

    #[inline]
    pub fn eval(&self, s: f64) -> f64 {
        (self.f)(s)
    }

    /// ∫_a^b ds/G(s).
    pub fn inverse_integral(&self, a: f64, b: f64) -> Result<f64, QuadratureError> {
        if b <= a {
            return Ok(0.0);
        }
        let opts = QuadOptions { abs_tol: 1e-14, rel_tol: 1e-13, max_intervals: 2000 };
        if a > 0.0 {
            log_scale_integral(|s| 1.0 / self.eval(s), a, b, &opts)
        } else {
            Ok(crate::quadrature::integrate(|s| 1.0 / self.eval(s), a, b, &opts)?.value)
        }
    }
}

/// Spot checks that `f` is nondecreasing on a geometric grid over `[lo, hi]`.
pub fn is_nondecreasing_on_grid<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, samples: usize) -> bool {
    let ratio = (hi / lo).powf(1.0 / (samples.max(2) - 1) as f64);
    let mut s = lo;
    let mut prev = f(s);
    for _ in 1..samples {
        s *= ratio;
        let v = f(s);
        if v < prev * (1.0 - 1e-14) {
            return false;
        }
        prev = v;
    }
    true
}
