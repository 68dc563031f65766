//! Every example builds and its `run_example` returns something sane.

macro_rules! example {
    ($name:ident) => {
        #[allow(dead_code)]
        mod $name {
            include!(concat!("../examples/", stringify!($name), ".rs"));
        }
    };
}

example!(signed_measures);
example!(vector_fields);
example!(flow_trajectories);
example!(concave_costs);
example!(transport_plans);
example!(cost_estimate);
example!(parameter_schedule);
example!(scenario_run);
example!(convergence_ladder);

#[test]
fn signed_measures_balance() {
    let (mass, reservoir) = signed_measures::run_example().unwrap();
    assert_eq!(mass, 0.25);
    assert_eq!(reservoir, 0.25);
}

#[test]
fn vector_field_estimates_stay_below_declared() {
    for (key, est) in vector_fields::run_example().unwrap() {
        let declared = ceflow::fields::catalog::by_key(&key, &Default::default()).unwrap().c_omega(1.0);
        assert!(est <= declared * (1.0 + 1e-9), "{key}: {est} > {declared}");
    }
}

#[test]
fn flow_matches_closed_form() {
    assert!(flow_trajectories::run_example().unwrap() < 1e-6);
}

#[test]
fn costs_are_bounded() {
    assert!(concave_costs::run_example().unwrap().iter().all(|c| c.is_finite() && *c > 0.0));
}

#[test]
fn transport_agrees_with_oracle() {
    assert!(transport_plans::run_example().unwrap() <= 1e-9);
}

#[test]
fn cost_estimate_holds() {
    assert!(cost_estimate::run_example().unwrap() <= 1.0 + 1e-5);
}

#[test]
fn schedule_grows_with_k() {
    let c = parameter_schedule::run_example().unwrap();
    assert!(c.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn scenario_passes() {
    assert!(scenario_run::run_example().unwrap());
}

#[test]
fn ladder_decreases() {
    assert_eq!(convergence_ladder::run_example().unwrap(), Some(true));
}
