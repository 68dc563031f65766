// Exact discrete OT with ◊: the simplex against enumeration, and the plan
// in its JSON form.

use ceflow::cost::ConcaveCost;
use ceflow::fields::Modulus;
use ceflow::instances::random_pair;
use ceflow::transport::{brute_force_ot, check_solution, reference_w, solve_ot, PlanDoc};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> Result<f64, Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let pair = random_pair(&mut rng);
    let cost = ConcaveCost::new(&Modulus::log_lipschitz(), 1.0, 0.05)?;
    let sol = solve_ot(&pair, &cost)?;
    let oracle = brute_force_ot(&pair, &cost)?;
    let chk = check_solution(&pair, &cost, &sol);
    println!("simplex {:.12} enumeration {:.12} gap {:.1e}", sol.primal, oracle, chk.duality_gap);
    println!("reference W = {:.6}", reference_w(&pair)?);
    println!("{}", serde_json::to_string_pretty(&PlanDoc::from(&sol))?);
    Ok((sol.primal - oracle).abs())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example().map(|_| ())
}
