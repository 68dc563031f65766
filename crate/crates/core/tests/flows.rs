//! Characteristics against closed-form solutions.

use std::f64::consts::{FRAC_PI_2, PI};

use ceflow::fields::catalog;
use ceflow::flow::{flow_on_grid, flow_push, integrate_flow, FlowOptions};
use ceflow::measure::{Atom, AtomicSignedMeasure};

fn tight() -> FlowOptions {
    FlowOptions { abs_tol: 1e-13, rel_tol: 1e-12, ..FlowOptions::default() }
}

#[test]
fn rotation_quarter_and_half_turn() {
    let f = catalog::rotation(1.0);
    let q = integrate_flow(&f, &[1.0, 0.0], 0.0, FRAC_PI_2, &tight()).unwrap();
    assert!((q.terminal()[0]).abs() < 1e-8 && (q.terminal()[1] - 1.0).abs() < 1e-8);
    let h = integrate_flow(&f, &[0.3, 0.4], 0.0, PI, &tight()).unwrap();
    assert!((h.terminal()[0] + 0.3).abs() < 1e-8 && (h.terminal()[1] + 0.4).abs() < 1e-8);
}

#[test]
fn output_grid_is_hit_exactly() {
    let f = catalog::rotation(2.0);
    let grid = [0.1, 0.25, 0.7];
    let tr = integrate_flow(&f, &[1.0, 0.0], 0.0, 0.7, &tight()).unwrap();
    assert_eq!(*tr.times.last().unwrap(), 0.7);
    let at = flow_on_grid(&f, &[1.0, 0.0], 0.0, &grid, &tight()).unwrap();
    for (t, x) in grid.iter().zip(&at) {
        assert!((x[0] - (2.0 * t).cos()).abs() < 1e-9 && (x[1] - (2.0 * t).sin()).abs() < 1e-9);
    }
}

#[test]
fn linear_matrix_flow() {
    // x' = Ax with A = [[0, 1], [0, 0]]: x(t) = (x₀ + t y₀, y₀)
    let f = catalog::linear(vec![vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
    let tr = integrate_flow(&f, &[1.0, 2.0], 0.0, 1.5, &tight()).unwrap();
    assert!((tr.terminal()[0] - 4.0).abs() < 1e-10 && (tr.terminal()[1] - 2.0).abs() < 1e-12);
}

#[test]
fn osgood_1d_closed_form() {
    let f = catalog::osgood_1d();
    for x0 in [0.05, 0.3, 0.5, 0.9] {
        let tr = integrate_flow(&f, &[x0], 0.0, 2.0, &tight()).unwrap();
        let exact = (x0.ln() * (-2.0f64).exp()).exp();
        assert!((tr.terminal()[0] - exact).abs() < 1e-6, "{x0}");
    }
}

#[test]
fn planar_osgood_radial_closed_form() {
    // ln(−ln r²) grows like e^{2t} while r stays inside the plateau of the bump
    let f = catalog::planar_osgood();
    for (r0, th) in [(0.2f64, 0.0f64), (0.1, 1.0), (0.22, 2.5)] {
        let x0 = [r0 * th.cos(), r0 * th.sin()];
        let t = 0.3;
        let tr = integrate_flow(&f, &x0, 0.0, t, &tight()).unwrap();
        let m = (-(r0 * r0).ln()).ln() * (2.0 * t).exp();
        let r_exact = (-0.5 * m.exp()).exp();
        let x = tr.terminal();
        let r = x[0].hypot(x[1]);
        assert!((r / r_exact - 1.0).abs() < 1e-6, "{r} vs {r_exact}");
        // radial field: the angle is preserved
        assert!((x[1].atan2(x[0]) - th).abs() < 1e-9);
    }
}

#[test]
fn singular_point_freezes_trajectory() {
    let f = catalog::planar_osgood();
    let tr = integrate_flow(&f, &[0.0, 0.0], 0.0, 1.0, &tight()).unwrap();
    assert_eq!(tr.terminal(), &[0.0, 0.0]);
}

#[test]
fn push_forward_keeps_weights() {
    let m = AtomicSignedMeasure::new(
        2,
        vec![Atom::new(vec![0.1, 0.0], 0.5), Atom::new(vec![0.0, 0.15], -0.3)],
        0.0,
    )
    .unwrap();
    let p = flow_push(&catalog::planar_non_osgood(), &m, 0.2, &FlowOptions::default()).unwrap();
    let mut w: Vec<f64> = p.atoms().iter().map(|a| a.weight).collect();
    w.sort_by(f64::total_cmp);
    assert_eq!(w, vec![-0.3, 0.5]);
}
