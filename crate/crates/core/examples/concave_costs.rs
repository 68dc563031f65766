// The concave cost family for a few moduli: values, inverse, supremum.

use ceflow::cost::ConcaveCost;
use ceflow::fields::Modulus;

pub fn run_example() -> Result<Vec<f64>, Box<dyn std::error::Error>> {
    let mut sups = Vec::new();
    for omega in [Modulus::linear(), Modulus::log_lipschitz(), Modulus::iterated_log(1)] {
        let c = ConcaveCost::new(&omega, 1.0, 0.1)?;
        let values: Vec<f64> = [0.01, 0.1, 1.0, 10.0].iter().map(|&r| c.eval(r)).collect();
        let r_half = c.inverse(0.5 * c.c_infinity())?;
        println!(
            "{:<14} c(0.01, 0.1, 1, 10) = {values:.4?}  c(inf) = {:.4}  c^-1(c(inf)/2) = {r_half:.4}",
            omega.tag.as_deref().unwrap_or("?"),
            c.c_infinity()
        );
        sups.push(c.c_infinity());
    }
    Ok(sups)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example().map(|_| ())
}
