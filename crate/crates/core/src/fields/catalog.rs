//! Ready-made fields, selectable by key from scenario configs.
//!
//! Declared constants are dense-sampling suprema times a safety factor of
//! roughly 1.5–2; the growth envelope is G(s) = 1 + s throughout.

use serde_json::{Map, Value};

use super::{FieldError, GrowthEnvelope, Modulus, VectorFieldSpec};

pub const KEYS: [&str; 7] = [
    "zero",
    "constant",
    "linear",
    "rotation",
    "osgood_1d",
    "planar_osgood",
    "planar_non_osgood",
];

/// Width of the smooth matching zones of the 1-D field at 0 and 1.
pub const OSGOOD_1D_MARGIN: f64 = 1e-3;

/// b(t, x) = c.
pub fn constant(c: Vec<f64>) -> VectorFieldSpec {
    let speed = crate::numeric::norm(&c);
    let n = c.len();
    VectorFieldSpec::new(
        "constant",
        n,
        move |_, _, out| out.copy_from_slice(&c),
        GrowthEnvelope::affine(),
        Modulus::linear(),
        speed,
        0.0,
        true,
    )
}

/// b(t, x) = A x.
pub fn linear(a: Vec<Vec<f64>>) -> Result<VectorFieldSpec, FieldError> {
    let n = a.len();
    if n == 0 || a.iter().any(|row| row.len() != n) {
        return Err(FieldError::Invalid("linear field needs a nonempty square matrix".into()));
    }
    if a.iter().flatten().any(|v| !v.is_finite()) {
        return Err(FieldError::Invalid("matrix entries must be finite".into()));
    }
    // Frobenius norm bounds the operator norm
    let fro = a.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
    Ok(VectorFieldSpec::new(
        "linear",
        n,
        move |_, x, out| {
            for (o, row) in out.iter_mut().zip(&a) {
                *o = crate::numeric::dot(row, x);
            }
        },
        GrowthEnvelope::affine(),
        Modulus::linear(),
        fro,
        fro,
        true,
    ))
}

/// b(t, x, y) = speed·(−y, x).
pub fn rotation(speed: f64) -> VectorFieldSpec {
    VectorFieldSpec::new(
        "rotation",
        2,
        move |_, x, out| {
            out[0] = -speed * x[1];
            out[1] = speed * x[0];
        },
        GrowthEnvelope::affine(),
        Modulus::linear(),
        speed.abs(),
        speed.abs(),
        true,
    )
}

/// Quintic smoothstep: C² ramp from 0 at u ≤ 0 to 1 at u ≥ 1.
fn smoothstep(u: f64) -> f64 {
    let u = u.clamp(0.0, 1.0);
    u * u * u * (10.0 - 15.0 * u + 6.0 * u * u)
}

/// b(x) = −x ln x on (0, 1), zero elsewhere, matched smoothly on margins.
pub fn osgood_1d() -> VectorFieldSpec {
    VectorFieldSpec::new(
        "osgood_1d",
        1,
        |_, x, out| {
            let x = x[0];
            out[0] = if x > 0.0 && x < 1.0 {
                -x * x.ln() * smoothstep(x / OSGOOD_1D_MARGIN) * smoothstep((1.0 - x) / OSGOOD_1D_MARGIN)
            } else {
                0.0
            };
        },
        GrowthEnvelope::affine(),
        Modulus::log_lipschitz(),
        0.5,
        2.5,
        false,
    )
    .with_singular_point(vec![0.0])
}

fn psi(t: f64) -> f64 {
    if t > 0.0 { (-1.0 / t).exp() } else { 0.0 }
}

/// C^∞ radial bump: 1 for r ≤ 1/4, 0 for r ≥ 1/2.
pub fn radial_bump(r: f64) -> f64 {
    let a = psi(0.5 - r);
    let b = psi(r - 0.25);
    if a + b == 0.0 { 0.0 } else { a / (a + b) }
}

/// f = ln r²·ln(−ln r²).
pub fn planar_f(x: f64, y: f64) -> f64 {
    let l = (x * x + y * y).ln();
    l * (-l).ln()
}

/// g = ln r²·(ln(−ln r²))².
pub fn planar_g(x: f64, y: f64) -> f64 {
    let l = (x * x + y * y).ln();
    let ll = (-l).ln();
    l * ll * ll
}

/// (x f, y f) near the origin, cut off by [`radial_bump`].
pub fn planar_osgood() -> VectorFieldSpec {
    VectorFieldSpec::new(
        "planar_osgood",
        2,
        |_, p, out| {
            let r2 = p[0] * p[0] + p[1] * p[1];
            if r2 == 0.0 || r2 >= 0.25 {
                out[0] = 0.0;
                out[1] = 0.0;
                return;
            }
            let s = planar_f(p[0], p[1]) * radial_bump(r2.sqrt());
            out[0] = p[0] * s;
            out[1] = p[1] * s;
        },
        GrowthEnvelope::affine(),
        Modulus::iterated_log(1),
        1.0,
        3.0,
        false,
    )
    .with_singular_point(vec![0.0, 0.0])
}

/// (x g, −y g) near the origin, cut off by [`radial_bump`]; fails Osgood.
pub fn planar_non_osgood() -> VectorFieldSpec {
    VectorFieldSpec::new(
        "planar_non_osgood",
        2,
        |_, p, out| {
            let r2 = p[0] * p[0] + p[1] * p[1];
            if r2 == 0.0 || r2 >= 0.25 {
                out[0] = 0.0;
                out[1] = 0.0;
                return;
            }
            let s = planar_g(p[0], p[1]) * radial_bump(r2.sqrt());
            out[0] = p[0] * s;
            out[1] = -p[1] * s;
        },
        GrowthEnvelope::affine(),
        Modulus::iterated_log(2),
        1.5,
        3.0,
        false,
    )
    .with_singular_point(vec![0.0, 0.0])
}

/// Exact divergence of [`planar_osgood`] where the bump is 1 (r < 1/4).
pub fn planar_osgood_divergence(x: f64, y: f64) -> f64 {
    let ll = (-(x * x + y * y).ln()).ln();
    2.0 * planar_f(x, y) + 2.0 * ll + 2.0
}

/// Exact divergence of [`planar_non_osgood`] where the bump is 1.
pub fn planar_non_osgood_divergence(x: f64, y: f64) -> f64 {
    let r2 = x * x + y * y;
    let ll = (-r2.ln()).ln();
    2.0 * (x * x - y * y) / r2 * (ll * ll + 2.0 * ll)
}

fn param_f64(params: &Map<String, Value>, key: &str, default: f64) -> Result<f64, FieldError> {
    match params.get(key) {
        None => Ok(default),
        Some(v) => v
            .as_f64()
            .ok_or_else(|| FieldError::Invalid(format!("parameter {key:?} must be a number"))),
    }
}

fn param_vec(params: &Map<String, Value>, key: &str) -> Result<Option<Vec<f64>>, FieldError> {
    match params.get(key) {
        None => Ok(None),
        Some(v) => serde_json::from_value(v.clone())
            .map(Some)
            .map_err(|e| FieldError::Invalid(format!("parameter {key:?}: {e}"))),
    }
}

/// Builds a catalog field from its key and parameter map.
///
/// `zero`/`constant` take `velocity` (or `dimension` for zero), `linear`
/// takes `matrix`, `rotation` takes `speed`.
pub fn by_key(key: &str, params: &Map<String, Value>) -> Result<VectorFieldSpec, FieldError> {
    match key {
        "zero" => {
            let n = param_f64(params, "dimension", 2.0)? as usize;
            let mut f = constant(vec![0.0; n.max(1)]);
            f.key = "zero".into();
            Ok(f)
        }
        "constant" => {
            let v = param_vec(params, "velocity")?
                .ok_or_else(|| FieldError::Invalid("constant field needs \"velocity\"".into()))?;
            if v.is_empty() {
                return Err(FieldError::Invalid("velocity must be nonempty".into()));
            }
            Ok(constant(v))
        }
        "linear" => {
            let m: Vec<Vec<f64>> = match params.get("matrix") {
                Some(v) => serde_json::from_value(v.clone())
                    .map_err(|e| FieldError::Invalid(format!("parameter \"matrix\": {e}")))?,
                None => return Err(FieldError::Invalid("linear field needs \"matrix\"".into())),
            };
            linear(m)
        }
        "rotation" => Ok(rotation(param_f64(params, "speed", 1.0)?)),
        "osgood_1d" => Ok(osgood_1d()),
        "planar_osgood" => Ok(planar_osgood()),
        "planar_non_osgood" => Ok(planar_non_osgood()),
        other => Err(FieldError::UnknownKey(other.to_owned())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{estimate_modulus_constant, ModulusSampling};
    use rand::{Rng, SeedableRng};

    #[test]
    fn planar_field_matches_formula() {
        let b = planar_osgood().evaluate(0.0, &[0.1, 0.0]).unwrap();
        let expected = 0.1 * 0.01f64.ln() * (-(0.01f64.ln())).ln();
        assert!((b[0] - expected).abs() < 1e-15);
        assert_eq!(b[1], 0.0);
        assert_eq!(planar_osgood().evaluate(0.0, &[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
        assert_eq!(planar_osgood().evaluate(0.0, &[0.5, 0.1]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn planar_divergences_match_closed_forms() {
        for (field, exact) in [
            (planar_osgood(), planar_osgood_divergence as fn(f64, f64) -> f64),
            (planar_non_osgood(), planar_non_osgood_divergence),
        ] {
            let e = exact(0.1, 0.1);
            let d3 = field.divergence_numeric(0.0, &[0.1, 0.1], 1e-3).unwrap();
            let d4 = field.divergence_numeric(0.0, &[0.1, 0.1], 1e-4).unwrap();
            assert!((d3 - e).abs() < 1e-3, "{} {d3} {e}", field.key);
            assert!((d4 - e).abs() < 1e-5, "{} {d4} {e}", field.key);
            // second order: error drops ~100x per decade of h
            assert!((d4 - e).abs() < 0.05 * (d3 - e).abs().max(1e-9));
        }
    }

    #[test]
    fn divergence_loglog_coefficient_is_two() {
        // with coefficient 1 on ln(−ln r²) + 1 the formula undershoots by exactly that term
        let (x, y) = (0.1f64, 0.1f64);
        let ll = (-(x * x + y * y).ln()).ln();
        let halved = 2.0 * planar_f(x, y) + ll + 1.0;
        let numeric = planar_osgood().divergence_numeric(0.0, &[x, y], 1e-4).unwrap();
        assert!((numeric - halved - (ll + 1.0)).abs() < 1e-5);
    }

    #[test]
    fn declared_growth_holds_on_random_points() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for f in [osgood_1d(), planar_osgood(), planar_non_osgood(), rotation(1.0)] {
            for _ in 0..10_000 {
                let x: Vec<f64> = (0..f.dimension).map(|_| rng.random::<f64>() * 1.4 - 0.7).collect();
                f.check_growth(0.0, &x).unwrap();
            }
        }
    }

    #[test]
    fn osgood_1d_modulus_constant_matches_dense_oracle() {
        let f = osgood_1d();
        let w = Modulus::log_lipschitz();
        // dense oracle: pairs on a geometric grid of base points and offsets
        let mut dense = 0.0f64;
        let b = |x: f64| f.evaluate(0.0, &[x]).unwrap()[0];
        for i in 0..=400 {
            let x = 1e-6 + (1.0 - 2e-6) * (i as f64 / 400.0).powi(3);
            for j in 0..60 {
                let s = 10f64.powf(-10.0 + j as f64 / 6.0);
                let y = x + s;
                if y < 1.0 - 1e-6 {
                    dense = dense.max((b(x) - b(y)).abs() / w.eval(s));
                }
            }
        }
        let s = ModulusSampling { t_samples: 1, pair_samples: 60_000, time_horizon: 0.0, seed: 5 };
        let est = estimate_modulus_constant(&f, 1.0, &s).unwrap();
        let est2 = estimate_modulus_constant(&f, 1.0, &ModulusSampling { pair_samples: 120_000, ..s }).unwrap();
        assert!(dense.is_finite() && dense > 0.5);
        assert!((est2 - est) <= 0.05 * est, "unstable: {est} {est2}");
        assert!(est <= f.c_omega(1.0) && dense <= f.c_omega(1.0));
        assert!((est - dense).abs() <= 0.25 * dense, "{est} vs {dense}");
    }

    #[test]
    fn unknown_key_is_rejected() {
        assert!(matches!(by_key("nope", &Map::new()), Err(FieldError::UnknownKey(_))));
        assert_eq!(by_key("rotation", &Map::new()).unwrap().key, "rotation");
    }
}
