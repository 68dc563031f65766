//! Convolution of atomic measures with a radial bump η_α, quantized back
//! to atoms on the lattice hℤⁿ.
//!
//! Each atom's cell weights are renormalised to sum to one before they
//! are scaled by the atom weight, so signed mass is preserved to roundoff
//! instead of to the accuracy of the lattice Riemann sum.

use std::collections::BTreeMap;

use crate::measure::{Atom, AtomicSignedMeasure};
use crate::numeric::fsum;
use crate::quadrature::{integrate, QuadOptions};

use super::DiagnosticsError;

/// Coarsest accepted lattice: four cells per kernel radius.
pub const MIN_CELLS_PER_RADIUS: u32 = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MollifierSpec {
    pub alpha: f64,
    pub cells_per_radius: u32,
}

impl MollifierSpec {
    pub fn new(alpha: f64) -> Self {
        Self { alpha, cells_per_radius: MIN_CELLS_PER_RADIUS }
    }

    pub fn cell(&self) -> f64 {
        self.alpha / self.cells_per_radius as f64
    }

    pub fn validate(&self) -> Result<(), DiagnosticsError> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(DiagnosticsError::BadParameter(format!("mollifier width must lie in (0,1), got {}", self.alpha)));
        }
        if self.cells_per_radius < MIN_CELLS_PER_RADIUS {
            return Err(DiagnosticsError::GridTooCoarse { cell: self.cell(), alpha: self.alpha });
        }
        Ok(())
    }
}

/// Surface area of the unit sphere in ℝⁿ.
pub fn sphere_area(n: usize) -> f64 {
    use std::f64::consts::PI;
    match n {
        0 => 0.0,
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 2.0 * PI / (n - 2) as f64 * sphere_area(n - 2),
    }
}

/// The normalised kernel η_α(x) = c_n α⁻ⁿ exp(−1/(1 − |x/α|²)).
#[derive(Debug, Clone, Copy)]
pub struct Kernel {
    alpha: f64,
    norm: f64,
}

impl Kernel {
    pub fn new(dimension: usize, alpha: f64) -> Result<Self, DiagnosticsError> {
        let opts = QuadOptions { abs_tol: 1e-16, rel_tol: 1e-14, max_intervals: 400 };
        let radial = integrate(
            |r| {
                if r >= 1.0 { 0.0 } else { (-1.0 / (1.0 - r * r)).exp() * r.powi(dimension as i32 - 1) }
            },
            0.0,
            1.0,
            &opts,
        )?;
        let norm = sphere_area(dimension) * radial.value * alpha.powi(dimension as i32);
        Ok(Self { alpha, norm })
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let q = x.iter().map(|v| v * v).sum::<f64>() / (self.alpha * self.alpha);
        if q >= 1.0 { 0.0 } else { (-1.0 / (1.0 - q)).exp() / self.norm }
    }
}

/// η_α ∗ m, quantized on the lattice with spacing α/cells_per_radius.
pub fn mollify(m: &AtomicSignedMeasure, spec: &MollifierSpec) -> Result<AtomicSignedMeasure, DiagnosticsError> {
    spec.validate()?;
    if m.reservoir() != 0.0 {
        return Err(DiagnosticsError::ReservoirPresent(m.reservoir()));
    }
    let n = m.dimension();
    let h = spec.cell();
    let kernel = Kernel::new(n, spec.alpha)?;
    let mut cells: BTreeMap<Vec<i64>, Vec<f64>> = BTreeMap::new();
    let mut idx = vec![0i64; n];
    let mut offset = vec![0.0; n];
    for atom in m.atoms() {
        let lo: Vec<i64> = atom.location.iter().map(|x| ((x - spec.alpha) / h).floor() as i64).collect();
        let hi: Vec<i64> = atom.location.iter().map(|x| ((x + spec.alpha) / h).ceil() as i64).collect();
        let mut local: Vec<(Vec<i64>, f64)> = Vec::new();
        idx.copy_from_slice(&lo);
        'lattice: loop {
            for d in 0..n {
                offset[d] = idx[d] as f64 * h - atom.location[d];
            }
            let v = kernel.eval(&offset);
            if v > 0.0 {
                local.push((idx.clone(), v));
            }
            // odometer increment
            for d in 0..n {
                if idx[d] < hi[d] {
                    idx[d] += 1;
                    continue 'lattice;
                }
                idx[d] = lo[d];
            }
            break;
        }
        let total = fsum(local.iter().map(|(_, v)| *v));
        for (key, v) in local {
            cells.entry(key).or_default().push(atom.weight * (v / total));
        }
    }
    let atoms = cells
        .into_iter()
        .map(|(key, parts)| Atom::new(key.iter().map(|&i| i as f64 * h).collect(), fsum(parts)))
        .collect();
    Ok(AtomicSignedMeasure::new(n, atoms, 0.0)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transport::reference_w_signed;

    #[test]
    fn kernel_has_unit_mass() {
        // fine lattice Riemann sum of the normalised kernel
        for (n, cells) in [(1usize, 2000i64), (2, 200)] {
            let alpha = 0.3;
            let k = Kernel::new(n, alpha).unwrap();
            let h = alpha / cells as f64;
            let mut sum = 0.0;
            if n == 1 {
                for i in -cells..=cells {
                    sum += k.eval(&[i as f64 * h]) * h;
                }
            } else {
                for i in -cells..=cells {
                    for j in -cells..=cells {
                        sum += k.eval(&[i as f64 * h, j as f64 * h]) * h * h;
                    }
                }
            }
            assert!((sum - 1.0).abs() < 1e-10, "n={n}: {sum}");
        }
        assert!((sphere_area(3) - 4.0 * std::f64::consts::PI).abs() < 1e-14);
    }

    #[test]
    fn single_atom_keeps_its_mass_and_support() {
        let m = AtomicSignedMeasure::dirac(vec![0.123, -0.4], -0.7).unwrap();
        let s = MollifierSpec::new(0.05);
        let out = mollify(&m, &s).unwrap();
        assert!((out.mass() + 0.7).abs() < 1e-14);
        for a in out.atoms() {
            assert!(crate::numeric::distance(&a.location, &[0.123, -0.4]) < 0.05);
        }
        // every particle moves less than alpha
        assert!(reference_w_signed(&out, &m).unwrap() <= 0.05 * 0.7);
    }

    #[test]
    fn overlapping_opposite_atoms_cancel() {
        let m = AtomicSignedMeasure::new(1, vec![Atom::new(vec![0.0], 1.0), Atom::new(vec![0.02], -1.0)], 0.0).unwrap();
        let out = mollify(&m, &MollifierSpec { alpha: 0.1, cells_per_radius: 8 }).unwrap();
        assert!(out.total_variation() < m.total_variation());
        assert!(out.mass().abs() < 1e-14);
    }

    #[test]
    fn coarse_grid_and_reservoir_are_rejected() {
        let m = AtomicSignedMeasure::dirac(vec![0.0], 1.0).unwrap();
        assert!(matches!(
            mollify(&m, &MollifierSpec { alpha: 0.1, cells_per_radius: 3 }),
            Err(DiagnosticsError::GridTooCoarse { .. })
        ));
        assert!(matches!(
            mollify(&m.with_reservoir(0.5), &MollifierSpec::new(0.1)),
            Err(DiagnosticsError::ReservoirPresent(_))
        ));
    }
}
