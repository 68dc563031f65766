// Characteristics with the adaptive Dormand–Prince integrator.

use ceflow::fields::catalog;
use ceflow::flow::{integrate_flow, FlowOptions};
use ceflow::io::trajectory_csv;

pub fn run_example() -> Result<f64, Box<dyn std::error::Error>> {
    let opts = FlowOptions { abs_tol: 1e-12, rel_tol: 1e-12, ..FlowOptions::default() };
    let rot = catalog::rotation(1.0);
    let quarter = integrate_flow(&rot, &[1.0, 0.0], 0.0, std::f64::consts::FRAC_PI_2, &opts)?;
    println!("rotation: (1, 0) -> {:?} in {} steps", quarter.terminal(), quarter.steps.len());

    // ln x(t) = e^{-t} ln x0 for b = -x ln x
    let osg = catalog::osgood_1d();
    let tr = integrate_flow(&osg, &[0.5], 0.0, 1.0, &opts)?;
    let err = (tr.terminal()[0] - 0.5f64.powf((-1.0f64).exp())).abs();
    println!("osgood 1-D: error against closed form {err:.2e}");
    print!("{}", trajectory_csv(&tr).lines().take(4).collect::<Vec<_>>().join("\n"));
    println!("\n...");
    Ok(err)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example().map(|_| ())
}
