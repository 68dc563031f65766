//! Randomized cross-checks of the simplex against the enumeration oracle.

use ceflow::cost::ConcaveCost;
use ceflow::fields::Modulus;
use ceflow::instances::{cost_bank, random_pair};
use ceflow::transport::{brute_force_ot, check_solution, solve_ot, ReferenceCost};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn simplex_matches_oracle_on_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let costs = cost_bank();
    let mut worst = 0.0f64;
    for k in 0..300 {
        let pair = random_pair(&mut rng);
        let c = &costs[k % costs.len()];
        let s = solve_ot(&pair, c).unwrap();
        let o = brute_force_ot(&pair, c).unwrap();
        worst = worst.max((s.primal - o).abs());
        let chk = check_solution(&pair, c, &s);
        assert!(chk.duality_gap <= 1e-9 * (1.0 + s.primal.abs()), "{k}: {chk:?}");
        assert!(chk.slackness <= 1e-9 && chk.lipschitz_excess <= 1e-9 && chk.bound_excess <= 1e-9, "{k}: {chk:?}");
        assert!(chk.marginal_error <= 1e-12 * (1.0 + pair.mass()), "{k}: {chk:?}");
        let r = solve_ot(&pair, &ReferenceCost).unwrap();
        assert!((r.primal - brute_force_ot(&pair, &ReferenceCost).unwrap()).abs() <= 1e-9);
    }
    assert!(worst <= 1e-9, "max deviation {worst}");
}

#[test]
fn scaling_beta_scales_value_and_keeps_plan() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let c1 = ConcaveCost::new(&Modulus::log_lipschitz(), 1.0, 0.2).unwrap();
    let c3 = c1.with_beta(3.0).unwrap();
    for _ in 0..50 {
        let pair = random_pair(&mut rng);
        let a = solve_ot(&pair, &c1).unwrap();
        let b = solve_ot(&pair, &c3).unwrap();
        assert!((b.primal - 3.0 * a.primal).abs() <= 1e-12 * (1.0 + b.primal));
        let sa: Vec<(usize, usize)> = a.plan.entries.iter().map(|e| (e.source, e.target)).collect();
        let sb: Vec<(usize, usize)> = b.plan.entries.iter().map(|e| (e.source, e.target)).collect();
        assert_eq!(sa, sb);
    }
}
