// D(t) against its bound for the difference of two solutions computed at
// different tolerances, on the planar field near its singular point.

use ceflow::diagnostics::estimate::variation_integrals;
use ceflow::diagnostics::EstimateSetup;
use ceflow::fields::catalog;
use ceflow::flow::{flow_push_grid, FlowOptions};
use ceflow::measure::{Atom, AtomicSignedMeasure};

pub fn run_example() -> Result<f64, Box<dyn std::error::Error>> {
    let field = catalog::planar_osgood();
    let atoms = (0..12)
        .map(|i| {
            let th = i as f64 * std::f64::consts::TAU / 12.0;
            Atom::new(vec![0.2 * th.cos(), 0.2 * th.sin()], 1.0 / 12.0)
        })
        .collect();
    let rho0 = AtomicSignedMeasure::new(2, atoms, 0.0)?;
    let times: Vec<f64> = (0..=5).map(|i| 0.1 * i as f64).collect();
    let loose = FlowOptions { rel_tol: 1e-5, abs_tol: 1e-7, ..FlowOptions::default() };
    let a = flow_push_grid(&field, &rho0, &times, &loose)?;
    let b = flow_push_grid(&field, &rho0, &times, &loose.scaled(1e-3))?;
    let rho: Vec<_> = b.iter().zip(&a).map(|(x, y)| x.difference(y)).collect::<Result<_, _>>()?;

    let setup = EstimateSetup::new(&field, 2, 0.02, 1.0, 0.1)?;
    let bounds = setup.bound_series(&times, &rho)?;
    let (total, _) = variation_integrals(&times, &rho, 2)?;
    let mut worst = 0.0f64;
    for (i, t) in times.iter().enumerate() {
        let d = setup.d_value(&rho[i])?;
        println!("t={t:.1}  D={d:.3e}  bound={:.3e}  ∫|ρ|={:.3e}", bounds[i].bound, total[i]);
        if bounds[i].bound > 0.0 {
            worst = worst.max(d / bounds[i].bound);
        }
    }
    println!("max D/bound = {worst:.3e}");
    Ok(worst)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example().map(|_| ())
}
