//! Velocity fields b(t, x) bundled with a growth envelope G, a modulus ω
//! and the constants that make |b| ≤ C_G·G(|x|) and
//! |b(x) − b(y)| ≤ C_ω·ω(|x − y|) hold.

pub mod catalog;
pub mod modulus;

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use modulus::{osgood_integral, GrowthEnvelope, Modulus};

pub type VelocityFn = Arc<dyn Fn(f64, &[f64], &mut [f64]) + Send + Sync>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FieldError {
    #[error("field {key}: non-finite velocity at t = {t}, x = {x:?}")]
    NonFinite { key: String, t: f64, x: Vec<f64> },
    #[error("field {key}: point has {got} coordinates, expected {expected}")]
    Dimension { key: String, expected: usize, got: usize },
    #[error("field {key}: |b| = {speed} exceeds C_G·G(|x|) = {bound} at x = {x:?}")]
    GrowthViolation {
        key: String,
        x: Vec<f64>,
        speed: f64,
        bound: f64,
    },
    #[error("degenerate modulus: omega({distance}) = 0 for distinct points")]
    DegenerateModulus { distance: f64 },
    #[error("point {x:?} is within {distance} of a singular point")]
    NearSingular { x: Vec<f64>, distance: f64 },
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("unknown field key {0:?}")]
    UnknownKey(String),
}

#[derive(Clone)]
pub struct VectorFieldSpec {
    pub key: String,
    pub dimension: usize,
    b: VelocityFn,
    pub growth: GrowthEnvelope,
    pub modulus: Modulus,
    /// The constant of the growth condition.
    pub c_growth: f64,
    c_omega: f64,
    /// Points where the field is only continuous; the flow freezes there.
    pub singular_points: Vec<Vec<f64>>,
    /// Globally Lipschitz (ω = s is an honest modulus).
    pub lipschitz: bool,
}

impl fmt::Debug for VectorFieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VectorFieldSpec")
            .field("key", &self.key)
            .field("dimension", &self.dimension)
            .field("modulus", &self.modulus)
            .field("c_growth", &self.c_growth)
            .field("c_omega", &self.c_omega)
            .finish()
    }
}

impl VectorFieldSpec {
    #[allow(clippy::too_many_arguments)]
    pub fn new<F>(
        key: &str,
        dimension: usize,
        b: F,
        growth: GrowthEnvelope,
        modulus: Modulus,
        c_growth: f64,
        c_omega: f64,
        lipschitz: bool,
    ) -> Self
    where
        F: Fn(f64, &[f64], &mut [f64]) + Send + Sync + 'static,
    {
        Self {
            key: key.to_owned(),
            dimension,
            b: Arc::new(b),
            growth,
            modulus,
            c_growth,
            c_omega,
            singular_points: Vec::new(),
            lipschitz,
        }
    }

    pub fn with_singular_point(mut self, p: Vec<f64>) -> Self {
        self.singular_points.push(p);
        self
    }

    /// Declared C_{ω,R}; catalog fields use one constant for every radius.
    pub fn c_omega(&self, _radius: f64) -> f64 {
        self.c_omega
    }

    /// Writes b(t, x) into `out` without validation (hot path of the integrator).
    #[inline]
    pub fn eval_into(&self, t: f64, x: &[f64], out: &mut [f64]) {
        (self.b)(t, x, out)
    }

    pub fn evaluate(&self, t: f64, x: &[f64]) -> Result<Vec<f64>, FieldError> {
        if x.len() != self.dimension {
            return Err(FieldError::Dimension {
                key: self.key.clone(),
                expected: self.dimension,
                got: x.len(),
            });
        }
        let mut out = vec![0.0; self.dimension];
        self.eval_into(t, x, &mut out);
        if out.iter().any(|v| !v.is_finite()) {
            return Err(FieldError::NonFinite { key: self.key.clone(), t, x: x.to_vec() });
        }
        Ok(out)
    }

    /// Hard check of |b(t,x)| ≤ C_G·G(|x|) at one point.
    pub fn check_growth(&self, t: f64, x: &[f64]) -> Result<(), FieldError> {
        let v = self.evaluate(t, x)?;
        let speed = crate::numeric::norm(&v);
        let bound = self.c_growth * self.growth.eval(crate::numeric::norm(x));
        if speed > bound * (1.0 + 1e-12) + 1e-300 {
            return Err(FieldError::GrowthViolation { key: self.key.clone(), x: x.to_vec(), speed, bound });
        }
        Ok(())
    }

    /// Distance from `x` to the nearest declared singular point.
    pub fn singular_distance(&self, x: &[f64]) -> f64 {
        self.singular_points
            .iter()
            .map(|p| crate::numeric::distance(p, x))
            .fold(f64::INFINITY, f64::min)
    }

    /// Central-difference divergence with step `h`.
    pub fn divergence_numeric(&self, t: f64, x: &[f64], h: f64) -> Result<f64, FieldError> {
        if !(h > 0.0) {
            return Err(FieldError::Invalid(format!("step must be positive, got {h}")));
        }
        let d = self.singular_distance(x);
        if d < 2.0 * h {
            return Err(FieldError::NearSingular { x: x.to_vec(), distance: d });
        }
        let mut y = x.to_vec();
        let mut div = 0.0;
        for i in 0..self.dimension {
            y[i] = x[i] + h;
            let plus = self.evaluate(t, &y)?[i];
            y[i] = x[i] - h;
            let minus = self.evaluate(t, &y)?[i];
            y[i] = x[i];
            div += (plus - minus) / (2.0 * h);
        }
        Ok(div)
    }
}

/// Settings for [`estimate_modulus_constant`].
#[derive(Debug, Clone, Copy)]
pub struct ModulusSampling {
    pub t_samples: usize,
    pub pair_samples: usize,
    pub time_horizon: f64,
    pub seed: u64,
}

/// max over sampled (t, x, y) in B(0,R) of |b(t,x) − b(t,y)|/ω(|x − y|).
///
/// Pairs come from one seeded stream cycling through three kinds: both
/// points uniform in the ball; a uniform base point with a partner at
/// log-uniform separation in 1e-10..R; and the same with the base point at
/// log-uniform distance from a declared singular point (where the ratio
/// peaks). A larger `pair_samples` extends the same stream, so the estimate
/// is nondecreasing in the sample count.
pub fn estimate_modulus_constant(
    field: &VectorFieldSpec,
    radius: f64,
    sampling: &ModulusSampling,
) -> Result<f64, FieldError> {
    if !(radius > 0.0) || sampling.t_samples == 0 || sampling.pair_samples == 0 {
        return Err(FieldError::Invalid("radius and sample counts must be positive".into()));
    }
    let n = field.dimension;
    let mut rng = ChaCha8Rng::seed_from_u64(sampling.seed);
    let times: Vec<f64> = if sampling.t_samples == 1 {
        vec![0.0]
    } else {
        (0..sampling.t_samples)
            .map(|i| sampling.time_horizon * i as f64 / (sampling.t_samples - 1) as f64)
            .collect()
    };
    let mut best = 0.0f64;
    let mut bx = vec![0.0; n];
    let mut by = vec![0.0; n];
    for k in 0..sampling.pair_samples {
        let near_singular = k % 3 == 2 && !field.singular_points.is_empty();
        let x = if near_singular {
            let p = &field.singular_points[rng.random_range(0..field.singular_points.len())];
            let s = radius * 10f64.powf(-9.0 * rng.random::<f64>());
            let dir = sample_sphere(&mut rng, n);
            p.iter().zip(&dir).map(|(a, d)| a + s * d).collect()
        } else {
            sample_ball(&mut rng, n, radius)
        };
        let y = if k % 3 == 0 {
            sample_ball(&mut rng, n, radius)
        } else {
            let s = radius * 10f64.powf(-10.0 * rng.random::<f64>());
            let dir = sample_sphere(&mut rng, n);
            x.iter().zip(&dir).map(|(a, d)| a + s * d).collect()
        };
        let dist = crate::numeric::distance(&x, &y);
        if dist == 0.0 {
            continue;
        }
        let w = field.modulus.eval(dist);
        if !(w > 0.0) {
            return Err(FieldError::DegenerateModulus { distance: dist });
        }
        for &t in &times {
            field.eval_into(t, &x, &mut bx);
            field.eval_into(t, &y, &mut by);
            let diff = crate::numeric::distance(&bx, &by);
            best = best.max(diff / w);
        }
    }
    Ok(best)
}

fn sample_sphere<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        let r = crate::numeric::norm(&v);
        if r > 1e-3 && r <= 1.0 {
            return v.into_iter().map(|c| c / r).collect();
        }
    }
}

fn sample_ball<R: Rng>(rng: &mut R, n: usize, radius: f64) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        if crate::numeric::norm(&v) <= 1.0 {
            return v.into_iter().map(|c| c * radius).collect();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::catalog;
    use super::*;

    #[test]
    fn evaluate_examples() {
        let c = catalog::constant(vec![1.5, -2.0]);
        assert_eq!(c.evaluate(0.3, &[9.0, 9.0]).unwrap(), vec![1.5, -2.0]);
        let l = catalog::linear(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(l.evaluate(0.0, &[2.0, 0.0]).unwrap(), vec![2.0, 0.0]);
        assert!(l.evaluate(0.0, &[1.0]).is_err());
    }

    #[test]
    fn modulus_constant_examples() {
        let s = ModulusSampling { t_samples: 2, pair_samples: 500, time_horizon: 1.0, seed: 3 };
        let c = catalog::constant(vec![1.0]);
        assert_eq!(estimate_modulus_constant(&c, 2.0, &s).unwrap(), 0.0);
        let l = catalog::linear(vec![vec![1.0]]).unwrap();
        let v = estimate_modulus_constant(&l, 2.0, &s).unwrap();
        assert!((v - 1.0).abs() < 1e-6, "{v}");
    }

    #[test]
    fn modulus_estimate_is_monotone_in_samples() {
        let f = catalog::planar_osgood();
        let mut prev = 0.0;
        for n in [10, 100, 1000, 4000] {
            let s = ModulusSampling { t_samples: 1, pair_samples: n, time_horizon: 0.0, seed: 9 };
            let v = estimate_modulus_constant(&f, 0.6, &s).unwrap();
            assert!(v >= prev);
            assert!(v <= f.c_omega(0.6));
            prev = v;
        }
    }

    #[test]
    fn divergence_of_simple_fields() {
        let l = catalog::linear(vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]).unwrap();
        let d = l.divergence_numeric(0.0, &[0.3, -0.2, 1.0], 1e-4).unwrap();
        assert!((d - 3.0).abs() < 1e-8);
        let r = catalog::rotation(1.0);
        assert!(r.divergence_numeric(0.0, &[0.4, 0.7], 1e-4).unwrap().abs() < 1e-6);
        let p = catalog::planar_osgood();
        assert!(matches!(
            p.divergence_numeric(0.0, &[1e-5, 0.0], 1e-4),
            Err(FieldError::NearSingular { .. })
        ));
    }
}
