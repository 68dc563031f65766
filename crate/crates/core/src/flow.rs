//! Characteristics φ̇_t(x) = b(t, φ_t(x)) by an embedded Dormand–Prince
//! 5(4) pair with PI step-size control, and push-forward of atomic measures
//! along them.

use rayon::prelude::*;
use thiserror::Error;

use crate::fields::{FieldError, Modulus, VectorFieldSpec};
use crate::measure::{push_forward, AtomicSignedMeasure, MeasureError};

/// Within this distance of a declared singular point a collapsing step
/// size freezes the trajectory instead of failing.
pub const SINGULAR_FREEZE_RADIUS: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error("step size {h:e} fell below the minimum at t = {t}")]
    StepUnderflow { t: f64, h: f64, partial: Box<Trajectory> },
    #[error("more than {0} steps")]
    MaxSteps(usize),
    #[error("invalid options: {0}")]
    Options(String),
    #[error("invalid time span [{t0}, {t1}]")]
    TimeSpan { t0: f64, t1: f64 },
    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("atom {index}: {source}")]
    Atom { index: usize, source: Box<FlowError> },
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_step: f64,
    pub min_step: f64,
    pub max_steps: usize,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-8,
            max_step: f64::INFINITY,
            min_step: 1e-14,
            max_steps: 1_000_000,
        }
    }
}

impl FlowOptions {
    pub fn validate(&self) -> Result<(), FlowError> {
        let ok = self.abs_tol > 0.0
            && self.rel_tol > 0.0
            && self.max_step > 0.0
            && self.min_step > 0.0
            && self.min_step <= self.max_step
            && self.max_steps > 0;
        if ok {
            Ok(())
        } else {
            Err(FlowError::Options(format!("{self:?}")))
        }
    }

    /// Both tolerances scaled by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self { abs_tol: self.abs_tol * factor, rel_tol: self.rel_tol * factor, ..*self }
    }
}

/// Accepted steps of one characteristic.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub positions: Vec<Vec<f64>>,
    /// Step that led to each point (0 for the initial point).
    pub steps: Vec<f64>,
    /// Scaled local error estimate of that step.
    pub errors: Vec<f64>,
    /// Time at which the trajectory was frozen at a singular point.
    pub frozen_at: Option<f64>,
}

impl Trajectory {
    pub fn terminal(&self) -> &[f64] {
        self.positions.last().expect("trajectory has an initial point")
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// PI controller (Hairer–Wanner defaults)
const BETA: f64 = 0.04;
const EXPO1: f64 = 0.2 - BETA * 0.75;
const SAFE: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

/// Optional freeze rule: distance from the current state to the nearest
/// point where freezing is allowed.
pub type FreezeProbe<'a> = &'a (dyn Fn(&[f64]) -> f64 + Sync);

/// Integrates y′ = f(t, y) from `t0` through the increasing `outputs`,
/// landing exactly on each. Returns all accepted steps and the states at
/// the output times.
pub fn dopri5<F>(
    f: F,
    y0: &[f64],
    t0: f64,
    outputs: &[f64],
    opts: &FlowOptions,
    freeze: Option<FreezeProbe<'_>>,
) -> Result<(Trajectory, Vec<Vec<f64>>), FlowError>
where
    F: Fn(f64, &[f64], &mut [f64]) -> Result<(), FlowError>,
{
    opts.validate()?;
    let n = y0.len();
    if y0.iter().any(|v| !v.is_finite()) {
        return Err(FlowError::NonFinite { t: t0 });
    }
    if outputs.iter().any(|&t| !(t >= t0) || !t.is_finite()) || outputs.windows(2).any(|w| w[1] < w[0]) {
        return Err(FlowError::TimeSpan { t0, t1: outputs.last().copied().unwrap_or(t0) });
    }
    let mut traj = Trajectory {
        times: vec![t0],
        positions: vec![y0.to_vec()],
        steps: vec![0.0],
        errors: vec![0.0],
        frozen_at: None,
    };
    let mut at_outputs = Vec::with_capacity(outputs.len());
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k1 = vec![0.0; n];
    let (mut k2, mut k3, mut k4, mut k5, mut k6, mut k7) =
        (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut ytmp = vec![0.0; n];
    let mut ynew = vec![0.0; n];
    f(t, &y, &mut k1)?;
    let t_end = outputs.last().copied().unwrap_or(t0);
    let mut h = initial_step(&f, t, &y, &k1, opts, t_end - t0)?;
    let mut facold = 1e-4f64;
    let mut steps = 0usize;
    let mut out_idx = 0;
    let mut frozen = false;
    let mut reject_streak = false;

    while out_idx < outputs.len() {
        let target = outputs[out_idx];
        if t >= target || frozen {
            at_outputs.push(y.clone());
            out_idx += 1;
            continue;
        }
        steps += 1;
        if steps > opts.max_steps {
            return Err(FlowError::MaxSteps(opts.max_steps));
        }
        let mut last = false;
        if t + h >= target || t + 1.01 * h >= target {
            h = target - t;
            last = true;
        }
        h = h.min(opts.max_step);
        if h < opts.min_step && !last {
            if let Some(probe) = freeze {
                if probe(&y) <= SINGULAR_FREEZE_RADIUS {
                    frozen = true;
                    traj.frozen_at = Some(t);
                    continue;
                }
            }
            return Err(FlowError::StepUnderflow { t, h, partial: Box::new(traj) });
        }

        for i in 0..n {
            ytmp[i] = y[i] + h * A21 * k1[i];
        }
        f(t + C2 * h, &ytmp, &mut k2)?;
        for i in 0..n {
            ytmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        f(t + C3 * h, &ytmp, &mut k3)?;
        for i in 0..n {
            ytmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        f(t + C4 * h, &ytmp, &mut k4)?;
        for i in 0..n {
            ytmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        f(t + C5 * h, &ytmp, &mut k5)?;
        for i in 0..n {
            ytmp[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        let t_new = if last { target } else { t + h };
        f(t_new, &ytmp, &mut k6)?;
        for i in 0..n {
            ynew[i] = y[i] + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
        }
        f(t_new, &ynew, &mut k7)?;

        let mut err = 0.0;
        for i in 0..n {
            let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = opts.abs_tol + opts.rel_tol * y[i].abs().max(ynew[i].abs());
            err += (e / sc) * (e / sc);
        }
        let err = (err / n.max(1) as f64).sqrt();
        if !err.is_finite() {
            if ynew.iter().any(|v| !v.is_finite()) && h <= opts.min_step {
                return Err(FlowError::NonFinite { t });
            }
            h *= FAC_MIN;
            reject_streak = true;
            continue;
        }

        let fac11 = err.powf(EXPO1);
        if err <= 1.0 {
            // accepted
            let fac = (fac11 / facold.powf(BETA) / SAFE).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
            let mut h_new = h / fac;
            if reject_streak {
                h_new = h_new.min(h);
            }
            reject_streak = false;
            facold = err.max(1e-4);
            t = t_new;
            std::mem::swap(&mut y, &mut ynew);
            std::mem::swap(&mut k1, &mut k7);
            traj.times.push(t);
            traj.positions.push(y.clone());
            traj.steps.push(h);
            traj.errors.push(err);
            if !last {
                h = h_new;
            } else {
                // keep the controller's proposal for the next interval
                h = h_new.max(h);
            }
        } else {
            h /= (fac11 / SAFE).min(1.0 / FAC_MIN);
            reject_streak = true;
        }
    }
    if frozen {
        // the frozen state stands for the rest of the horizon
        if traj.times.last() != Some(&t_end) {
            traj.times.push(t_end);
            traj.positions.push(y.clone());
            traj.steps.push(0.0);
            traj.errors.push(0.0);
        }
    }
    Ok((traj, at_outputs))
}

fn initial_step<F>(f: &F, t: f64, y: &[f64], f0: &[f64], opts: &FlowOptions, span: f64) -> Result<f64, FlowError>
where
    F: Fn(f64, &[f64], &mut [f64]) -> Result<(), FlowError>,
{
    if span <= 0.0 {
        return Ok(opts.min_step.max(1e-6));
    }
    let n = y.len().max(1) as f64;
    let sc: Vec<f64> = y.iter().map(|v| opts.abs_tol + opts.rel_tol * v.abs()).collect();
    let d0 = (y.iter().zip(&sc).map(|(v, s)| (v / s).powi(2)).sum::<f64>() / n).sqrt();
    let d1 = (f0.iter().zip(&sc).map(|(v, s)| (v / s).powi(2)).sum::<f64>() / n).sqrt();
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h0 = h0.min(span).min(opts.max_step);
    let y1: Vec<f64> = y.iter().zip(f0).map(|(a, b)| a + h0 * b).collect();
    let mut f1 = vec![0.0; y.len()];
    f(t + h0, &y1, &mut f1)?;
    let d2 = (f1.iter().zip(f0).zip(&sc).map(|((a, b), s)| ((a - b) / s).powi(2)).sum::<f64>() / n).sqrt() / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    Ok((100.0 * h0).min(h1).min(span).min(opts.max_step).max(opts.min_step))
}

fn field_rhs(field: &VectorFieldSpec) -> impl Fn(f64, &[f64], &mut [f64]) -> Result<(), FlowError> + '_ {
    move |t, x, out| {
        field.eval_into(t, x, out);
        if out.iter().any(|v| !v.is_finite()) {
            return Err(FieldError::NonFinite { key: field.key.clone(), t, x: x.to_vec() }.into());
        }
        Ok(())
    }
}

fn check_dimension(field: &VectorFieldSpec, x: &[f64]) -> Result<(), FlowError> {
    if x.len() != field.dimension {
        return Err(FieldError::Dimension { key: field.key.clone(), expected: field.dimension, got: x.len() }.into());
    }
    Ok(())
}

/// Trajectory of φ_t(x0) for t in [t0, t1].
pub fn integrate_flow(
    field: &VectorFieldSpec,
    x0: &[f64],
    t0: f64,
    t1: f64,
    opts: &FlowOptions,
) -> Result<Trajectory, FlowError> {
    if !(t1 >= t0) {
        return Err(FlowError::TimeSpan { t0, t1 });
    }
    check_dimension(field, x0)?;
    let probe = |x: &[f64]| field.singular_distance(x);
    let (traj, _) = dopri5(field_rhs(field), x0, t0, &[t1], opts, Some(&probe))?;
    for (t, x) in traj.times.iter().zip(&traj.positions) {
        field.check_growth(*t, x)?;
    }
    Ok(traj)
}

/// Positions φ_t(x0) at each time of the increasing grid (starting at t0).
pub fn flow_on_grid(
    field: &VectorFieldSpec,
    x0: &[f64],
    t0: f64,
    grid: &[f64],
    opts: &FlowOptions,
) -> Result<Vec<Vec<f64>>, FlowError> {
    Ok(flow_on_grid_detailed(field, x0, t0, grid, opts)?.0)
}

/// As [`flow_on_grid`], also returning the freeze time if the trajectory
/// was stopped at a singular point.
pub fn flow_on_grid_detailed(
    field: &VectorFieldSpec,
    x0: &[f64],
    t0: f64,
    grid: &[f64],
    opts: &FlowOptions,
) -> Result<(Vec<Vec<f64>>, Option<f64>), FlowError> {
    check_dimension(field, x0)?;
    let probe = |x: &[f64]| field.singular_distance(x);
    let (traj, at) = dopri5(field_rhs(field), x0, t0, grid, opts, Some(&probe))?;
    for (t, x) in traj.times.iter().zip(&traj.positions) {
        field.check_growth(*t, x)?;
    }
    Ok((at, traj.frozen_at))
}

/// (φ_t)♯m; weights are copied untouched.
pub fn flow_push(
    field: &VectorFieldSpec,
    m: &AtomicSignedMeasure,
    t: f64,
    opts: &FlowOptions,
) -> Result<AtomicSignedMeasure, FlowError> {
    Ok(flow_push_grid(field, m, &[t], opts)?.pop().expect("one grid time"))
}

/// (φ_t)♯m at every time of an increasing grid starting at or after 0.
///
/// Atoms are integrated independently on the rayon pool and reassembled by
/// index, so the result does not depend on scheduling.
pub fn flow_push_grid(
    field: &VectorFieldSpec,
    m: &AtomicSignedMeasure,
    grid: &[f64],
    opts: &FlowOptions,
) -> Result<Vec<AtomicSignedMeasure>, FlowError> {
    Ok(flow_push_grid_detailed(field, m, grid, opts)?.0)
}

/// As [`flow_push_grid`], also returning each atom's freeze time.
pub fn flow_push_grid_detailed(
    field: &VectorFieldSpec,
    m: &AtomicSignedMeasure,
    grid: &[f64],
    opts: &FlowOptions,
) -> Result<(Vec<AtomicSignedMeasure>, Vec<Option<f64>>), FlowError> {
    if m.dimension() != field.dimension {
        return Err(FieldError::Dimension { key: field.key.clone(), expected: field.dimension, got: m.dimension() }.into());
    }
    let paths: Vec<(Vec<Vec<f64>>, Option<f64>)> = m
        .atoms()
        .par_iter()
        .enumerate()
        .map(|(index, a)| {
            flow_on_grid_detailed(field, &a.location, 0.0, grid, opts)
                .map_err(|e| FlowError::Atom { index, source: Box::new(e) })
        })
        .collect::<Result<_, _>>()?;
    let measures = (0..grid.len())
        .map(|k| Ok(push_forward(m, |i, _| Ok(paths[i].0[k].clone()))?))
        .collect::<Result<Vec<_>, FlowError>>()?;
    Ok((measures, paths.into_iter().map(|p| p.1).collect()))
}

/// |φ_back(φ_t(x)) − x| with φ_back the flow of the time-reversed field.
pub fn inverse_residual(field: &VectorFieldSpec, x: &[f64], t: f64, opts: &FlowOptions) -> Result<f64, FlowError> {
    let fwd = integrate_flow(field, x, 0.0, t, opts)?;
    let y = fwd.terminal().to_vec();
    let back = move |s: f64, z: &[f64], out: &mut [f64]| -> Result<(), FlowError> {
        field.eval_into(t - s, z, out);
        for v in out.iter_mut() {
            *v = -*v;
        }
        if out.iter().any(|v| !v.is_finite()) {
            return Err(FlowError::NonFinite { t: s });
        }
        Ok(())
    };
    let probe = |z: &[f64]| field.singular_distance(z);
    let (_, at) = dopri5(back, &y, 0.0, &[t], opts, Some(&probe))?;
    Ok(crate::numeric::distance(&at[0], x))
}

/// d(t) for ḋ = C·ω(d), d(0) = d0: the largest separation two
/// characteristics starting d0 apart can reach.
pub fn osgood_envelope(omega: &Modulus, c: f64, d0: f64, t: f64, opts: &FlowOptions) -> Result<f64, FlowError> {
    if !(d0 > 0.0 && c > 0.0 && t >= 0.0) {
        return Err(FlowError::Options(format!("envelope needs d0 > 0, C > 0, t >= 0 (got {d0}, {c}, {t})")));
    }
    let rhs = |_: f64, d: &[f64], out: &mut [f64]| -> Result<(), FlowError> {
        out[0] = c * omega.eval(d[0].max(0.0));
        Ok(())
    };
    // relative control only: d can be far below the absolute tolerance
    let o = FlowOptions { abs_tol: f64::MIN_POSITIVE.max(d0 * 1e-14), ..*opts };
    let (_, at) = dopri5(rhs, &[d0], 0.0, &[t], &o, None)?;
    Ok(at[0][0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::catalog;

    #[test]
    fn zero_field_stays_put() {
        let f = catalog::constant(vec![0.0, 0.0]);
        let tr = integrate_flow(&f, &[0.3, -1.0], 0.0, 2.0, &FlowOptions::default()).unwrap();
        assert_eq!(tr.terminal(), &[0.3, -1.0]);
        assert_eq!(inverse_residual(&f, &[0.3, -1.0], 1.0, &FlowOptions::default()).unwrap(), 0.0);
    }

    #[test]
    fn exponential_growth() {
        let f = catalog::linear(vec![vec![1.0]]).unwrap();
        let tr = integrate_flow(&f, &[1.0], 0.0, 1.0, &FlowOptions::default()).unwrap();
        assert!((tr.terminal()[0] - std::f64::consts::E).abs() <= 1e-8, "{}", tr.terminal()[0] - std::f64::consts::E);
        assert!(inverse_residual(&f, &[1.0], 1.0, &FlowOptions::default()).unwrap() <= 1e-7);
    }

    #[test]
    fn log_lipschitz_closed_form() {
        let f = catalog::osgood_1d();
        let tr = integrate_flow(&f, &[0.5], 0.0, 1.0, &FlowOptions::default()).unwrap();
        let exact = 0.5f64.powf((-1.0f64).exp());
        assert!((tr.terminal()[0] - exact).abs() <= 1e-6);
    }

    #[test]
    fn constant_field_translates() {
        let f = catalog::constant(vec![0.5, -0.25]);
        let m = AtomicSignedMeasure::new(
            2,
            vec![crate::measure::Atom::new(vec![0.0, 0.0], 1.0), crate::measure::Atom::new(vec![1.0, 1.0], -0.5)],
            0.0,
        )
        .unwrap();
        let p = flow_push(&f, &m, 2.0, &FlowOptions::default()).unwrap();
        assert!(crate::numeric::distance(&p.atoms()[0].location, &[1.0, -0.5]) < 1e-14);
        assert!(crate::numeric::distance(&p.atoms()[1].location, &[2.0, 0.5]) < 1e-14);
        assert_eq!(p.atoms()[1].weight, -0.5);
        assert_eq!(flow_push(&f, &m, 0.0, &FlowOptions::default()).unwrap(), m);
    }

    #[test]
    fn envelope_closed_forms() {
        let o = FlowOptions::default();
        let d = osgood_envelope(&Modulus::linear(), 2.0, 1e-3, 0.7, &o).unwrap();
        assert!((d / (1e-3 * (1.4f64).exp()) - 1.0).abs() < 1e-8);
        let d0 = 1e-4;
        let d = osgood_envelope(&Modulus::s_log_inv(), 1.0, d0, 0.5, &o).unwrap();
        assert!((d / d0.powf((-0.5f64).exp()) - 1.0).abs() < 1e-8);
        let seq: Vec<f64> = (2..12)
            .map(|k| osgood_envelope(&Modulus::log_lipschitz(), 1.0, 10f64.powi(-k), 1.0, &o).unwrap())
            .collect();
        assert!(seq.windows(2).all(|w| w[1] < w[0]) && seq[seq.len() - 1] < 1e-3);
    }

    #[test]
    fn bad_options_are_rejected() {
        let f = catalog::rotation(1.0);
        let o = FlowOptions { min_step: 1.0, max_step: 0.5, ..Default::default() };
        assert!(matches!(integrate_flow(&f, &[1.0, 0.0], 0.0, 1.0, &o), Err(FlowError::Options(_))));
    }
}
