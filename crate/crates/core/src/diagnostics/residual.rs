//! Residual of the weak formulation
//! ∫₀ᵀ∫ (∂_tφ + ⟨b, ∇φ⟩) dρ_t dt + ∫ φ(0,·) dρ₀ = 0
//! for separable test functions φ(t, x) = ψ(t)·g(x).

use crate::fields::VectorFieldSpec;
use crate::measure::AtomicSignedMeasure;
use crate::numeric::fsum;

use super::DiagnosticsError;

/// ψ(t) = (1 − t/T)³ times a compact bump g(x) = exp(1 − 1/(1 − |x−c|²/s²)).
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction {
    pub center: Vec<f64>,
    pub width: f64,
    pub horizon: f64,
}

impl TestFunction {
    pub fn new(center: Vec<f64>, width: f64, horizon: f64) -> Self {
        Self { center, width, horizon }
    }

    fn psi(&self, t: f64) -> (f64, f64) {
        let u = 1.0 - t / self.horizon;
        (u * u * u, -3.0 * u * u / self.horizon)
    }

    /// g and ∇g at x.
    fn space(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let s2 = self.width * self.width;
        let q = x.iter().zip(&self.center).map(|(a, c)| (a - c) * (a - c)).sum::<f64>() / s2;
        if q >= 1.0 {
            return (0.0, vec![0.0; x.len()]);
        }
        let g = (1.0 - 1.0 / (1.0 - q)).exp();
        let f = -g / ((1.0 - q) * (1.0 - q)) * 2.0 / s2;
        (g, x.iter().zip(&self.center).map(|(a, c)| f * (a - c)).collect())
    }

    pub fn value(&self, t: f64, x: &[f64]) -> f64 {
        self.psi(t).0 * self.space(x).0
    }

    /// ∂_tφ + ⟨b, ∇φ⟩ at (t, x).
    pub fn transport_derivative(&self, t: f64, x: &[f64], b: &[f64]) -> f64 {
        let (p, dp) = self.psi(t);
        let (g, grad) = self.space(x);
        dp * g + p * crate::numeric::dot(b, &grad)
    }
}

/// A small bank of test functions centred on the initial support.
pub fn default_bank(rho0: &AtomicSignedMeasure, horizon: f64) -> Vec<TestFunction> {
    let n = rho0.dimension();
    let radius = rho0.support_radius().max(0.5);
    let mut bank = vec![TestFunction::new(vec![0.0; n], 2.0 * radius, horizon)];
    for a in rho0.atoms().iter().take(3) {
        bank.push(TestFunction::new(a.location.clone(), radius, horizon));
    }
    bank
}

/// max over the bank of |trapezoid-in-time weak residual|.
pub fn weak_solution_residual(
    field: &VectorFieldSpec,
    times: &[f64],
    rho: &[AtomicSignedMeasure],
    bank: &[TestFunction],
) -> Result<f64, DiagnosticsError> {
    if times.len() != rho.len() || times.len() < 2 {
        return Err(DiagnosticsError::BadParameter(format!(
            "{} grid times for {} measures",
            times.len(),
            rho.len()
        )));
    }
    let mut worst = 0.0f64;
    for phi in bank {
        let mut integrand = Vec::with_capacity(times.len());
        for (&t, m) in times.iter().zip(rho) {
            let mut parts = Vec::with_capacity(m.len());
            for a in m.atoms() {
                let b = field.evaluate(t, &a.location)?;
                parts.push(a.weight * phi.transport_derivative(t, &a.location, &b));
            }
            integrand.push(fsum(parts));
        }
        let mut time_integral = Vec::with_capacity(times.len());
        for i in 1..times.len() {
            time_integral.push(0.5 * (times[i] - times[i - 1]) * (integrand[i] + integrand[i - 1]));
        }
        let initial = fsum(rho[0].atoms().iter().map(|a| a.weight * phi.value(times[0], &a.location)));
        let r = fsum(time_integral.into_iter().chain([initial]));
        worst = worst.max(r.abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::catalog;
    use crate::flow::{flow_push_grid, FlowOptions};

    fn grid(m: usize, t: f64) -> Vec<f64> {
        (0..=m).map(|i| t * i as f64 / m as f64).collect()
    }

    #[test]
    fn zero_measure_has_zero_residual() {
        let f = catalog::rotation(1.0);
        let z = AtomicSignedMeasure::zero(2);
        let bank = vec![TestFunction::new(vec![0.0, 0.0], 1.0, 1.0)];
        assert_eq!(weak_solution_residual(&f, &[0.0, 1.0], &[z.clone(), z], &bank).unwrap(), 0.0);
    }

    #[test]
    fn derivative_matches_finite_differences() {
        let phi = TestFunction::new(vec![0.1, -0.2], 0.8, 2.0);
        let (t, x, b) = (0.7, [0.3, 0.1], [0.4, -1.1]);
        let h = 1e-6;
        let fd = (phi.value(t + h, &[x[0] + h * b[0], x[1] + h * b[1]])
            - phi.value(t - h, &[x[0] - h * b[0], x[1] - h * b[1]]))
            / (2.0 * h);
        assert!((fd - phi.transport_derivative(t, &x, &b)).abs() < 1e-8);
    }

    #[test]
    fn constant_field_is_second_order() {
        let f = catalog::constant(vec![0.3, 0.2]);
        let rho0 = AtomicSignedMeasure::dirac(vec![0.1, 0.0], 1.0).unwrap();
        let bank = default_bank(&rho0, 1.0);
        let res: Vec<f64> = [8usize, 16, 32]
            .iter()
            .map(|&m| {
                let g = grid(m, 1.0);
                let traj = flow_push_grid(&f, &rho0, &g, &FlowOptions::default()).unwrap();
                weak_solution_residual(&f, &g, &traj, &bank).unwrap()
            })
            .collect();
        assert!(res[0] / res[1] > 3.5 && res[1] / res[2] > 3.5, "{res:?}");
    }
}
