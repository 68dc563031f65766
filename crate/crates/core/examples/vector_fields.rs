// The field catalog: evaluate fields and probe their modulus of continuity.

use ceflow::fields::{catalog, estimate_modulus_constant, ModulusSampling};

pub fn run_example() -> Result<Vec<(String, f64)>, Box<dyn std::error::Error>> {
    let sampling = ModulusSampling { t_samples: 1, pair_samples: 2000, time_horizon: 1.0, seed: 9 };
    let mut out = Vec::new();
    for field in [catalog::rotation(1.0), catalog::osgood_1d(), catalog::planar_osgood(), catalog::planar_non_osgood()] {
        let x = vec![0.1; field.dimension];
        let b = field.evaluate(0.0, &x)?;
        let est = estimate_modulus_constant(&field, 1.0, &sampling)?;
        println!(
            "{:<18} b({x:?}) = {b:.4?}  modulus {:?} (osgood: {})  sampled C ≈ {est:.3} (declared {})",
            field.key,
            field.modulus.tag,
            field.modulus.osgood,
            field.c_omega(1.0)
        );
        out.push((field.key.clone(), est));
    }
    Ok(out)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example().map(|_| ())
}
