//! Quick oracle checks behind `ceflow selftest`: each compares a library
//! path against something known independently (enumeration, closed forms).

use std::f64::consts::{E, FRAC_PI_2};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cost::ConcaveCost;
use crate::diagnostics::{build_cutoff, mollify, MollifierSpec};
use crate::fields::{catalog, GrowthEnvelope, Modulus};
use crate::flow::{flow_push, integrate_flow, FlowOptions};
use crate::instances::{cost_bank, random_measure, random_pair};
use crate::transport::{brute_force_ot, check_solution, solve_ot};

const OT_INSTANCES: usize = 100;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, err: f64, tol: f64) -> Check {
    Check { name, passed: err <= tol, detail: format!("error {err:.3e} (tol {tol:.0e})") }
}

fn failed(name: &'static str, e: impl std::fmt::Display) -> Check {
    Check { name, passed: false, detail: e.to_string() }
}

fn ot_against_oracle(seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let costs = cost_bank();
    let mut worst = 0.0f64;
    for i in 0..OT_INSTANCES {
        let pair = random_pair(&mut rng);
        let c = &costs[i % costs.len()];
        let (s, o) = match (solve_ot(&pair, c), brute_force_ot(&pair, c)) {
            (Ok(s), Ok(o)) => (s, o),
            (Err(e), _) | (_, Err(e)) => return failed("ot_vs_enumeration", e),
        };
        let chk = check_solution(&pair, c, &s);
        worst = worst
            .max((s.primal - o).abs())
            .max(chk.duality_gap)
            .max(chk.slackness)
            .max(chk.lipschitz_excess.max(0.0));
    }
    check("ot_vs_enumeration", worst, 1e-9)
}

fn flows() -> Vec<Check> {
    let opts = FlowOptions { abs_tol: 1e-12, rel_tol: 1e-12, ..FlowOptions::default() };
    let mut out = Vec::new();
    let exp = catalog::linear(vec![vec![1.0]]).expect("1x1 matrix");
    out.push(match integrate_flow(&exp, &[1.0], 0.0, 1.0, &opts) {
        Ok(t) => check("flow_linear_exp", (t.terminal()[0] - E).abs(), 1e-8),
        Err(e) => failed("flow_linear_exp", e),
    });
    let rot = catalog::rotation(1.0);
    out.push(match integrate_flow(&rot, &[1.0, 0.0], 0.0, FRAC_PI_2, &opts) {
        Ok(t) => {
            let x = t.terminal();
            check("flow_rotation_quarter", x[0].abs().max((x[1] - 1.0).abs()), 1e-8)
        }
        Err(e) => failed("flow_rotation_quarter", e),
    });
    // ln x(t) = e^{−t} ln x₀
    let osg = catalog::osgood_1d();
    out.push(match integrate_flow(&osg, &[0.3], 0.0, 1.0, &opts) {
        Ok(t) => check("flow_osgood_1d", (t.terminal()[0] - (0.3f64.ln() * (-1.0f64).exp()).exp()).abs(), 1e-6),
        Err(e) => failed("flow_osgood_1d", e),
    });
    out
}

fn cost_closed_form() -> Check {
    let c = match ConcaveCost::with_tail_scale(&Modulus::linear(), 1.0, 1.0, 2.0) {
        Ok(c) => c,
        Err(e) => return failed("cost_log1p", e),
    };
    let err = [1e-9, 1e-3, 0.25, 1.0, 1.5].iter().map(|&r| (c.eval(r) - r.ln_1p()).abs()).fold(0.0, f64::max);
    check("cost_log1p", err, 1e-12)
}

fn cutoff_radius() -> Check {
    match build_cutoff(&GrowthEnvelope::affine(), 1) {
        Ok(c) => check("cutoff_radius_k1", (c.r_k - (2.0 * E - 1.0)).abs(), 1e-10),
        Err(e) => failed("cutoff_radius_k1", e),
    }
}

fn mollifier_mass(seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let m = random_measure(&mut rng, 2, 5, false);
    match mollify(&m, &MollifierSpec::new(0.1)) {
        Ok(s) => check("mollifier_mass", (s.mass() - m.mass()).abs(), 1e-13 * m.mass()),
        Err(e) => failed("mollifier_mass", e),
    }
}

fn mass_conservation(seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xfeed);
    let m = random_measure(&mut rng, 2, 20, false);
    match flow_push(&catalog::rotation(1.0), &m, 1.0, &FlowOptions::default()) {
        Ok(p) => {
            let exact = p.mass().to_bits() == m.mass().to_bits() && p.total_variation().to_bits() == m.total_variation().to_bits();
            Check { name: "mass_conservation", passed: exact, detail: format!("mass {} -> {}", m.mass(), p.mass()) }
        }
        Err(e) => failed("mass_conservation", e),
    }
}

/// Every check, in a fixed order.
pub fn run_selftest(seed: u64) -> Vec<Check> {
    let mut out = vec![ot_against_oracle(seed)];
    out.extend(flows());
    out.push(cost_closed_form());
    out.push(cutoff_radius());
    out.push(mollifier_mass(seed));
    out.push(mass_conservation(seed));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selftest_passes() {
        for c in run_selftest(0) {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}
