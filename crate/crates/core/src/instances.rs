//! Seeded random OT instances shared by the self-test, the acceptance
//! suite and the integration tests.

use rand::Rng;

use crate::cost::ConcaveCost;
use crate::fields::Modulus;
use crate::measure::{balance_with_reservoir, Atom, AtomicSignedMeasure, BalancedPair};

/// Atoms per side (◊ counted) in [`random_pair`].
pub const MAX_ATOMS_PER_SIDE: usize = 6;

/// `atoms` points in [−1, 1]^dim with positive weights; `coarse` snaps
/// locations to a half-integer lattice and weights to quarters, which
/// produces ties and degenerate bases.
pub fn random_measure<R: Rng>(rng: &mut R, dim: usize, atoms: usize, coarse: bool) -> AtomicSignedMeasure {
    let list = (0..atoms)
        .map(|_| {
            let x = (0..dim)
                .map(|_| {
                    let v: f64 = rng.random_range(-1.0..1.0);
                    if coarse { (v * 2.0).round() / 2.0 } else { v }
                })
                .collect();
            let w = if coarse { rng.random_range(1..4) as f64 * 0.25 } else { rng.random_range(0.05..1.0) };
            Atom::new(x, w)
        })
        .collect();
    AtomicSignedMeasure::new(dim, list, 0.0).expect("finite positive atoms")
}

/// A balanced pair in dimension 1–3 with at most six points per side,
/// ◊ included. Roughly 40% have equal atom masses and no reservoir; the
/// rest carry the mass gap at ◊.
pub fn random_pair<R: Rng>(rng: &mut R) -> BalancedPair {
    loop {
        let dim = rng.random_range(1..=3);
        let coarse = rng.random_bool(0.3);
        let (p, q) = (rng.random_range(1..=5), rng.random_range(1..=5));
        let mu = random_measure(rng, dim, p, coarse);
        let nu = random_measure(rng, dim, q, coarse);
        let pair = if rng.random_bool(0.4) {
            let s = mu.mass() / nu.mass();
            BalancedPair::new(mu.clone(), nu.scaled(s).with_reservoir(mu.mass() - nu.scaled(s).mass())).ok()
        } else {
            balance_with_reservoir(&mu, &nu).ok()
        };
        if let Some(p) = pair {
            if p.mu().len() < MAX_ATOMS_PER_SIDE && p.nu().len() < MAX_ATOMS_PER_SIDE {
                return p;
            }
        }
    }
}

/// Costs over three moduli and two (β, δ) settings.
pub fn cost_bank() -> Vec<ConcaveCost> {
    let moduli = [Modulus::linear(), Modulus::log_lipschitz(), Modulus::iterated_log(1)];
    moduli
        .iter()
        .flat_map(|w| [(1.0, 0.05), (0.7, 1.0)].map(|(b, d)| ConcaveCost::new(w, b, d).expect("valid cost parameters")))
        .collect()
}
