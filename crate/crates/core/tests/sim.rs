mod common;

use common::{circular, params, reference_params, shifted_input};
use neurofield_core::inverse::InverseConfig;
use neurofield_core::model::{invariant_radius, ConstantInput, InputSignal};
use neurofield_core::observer::{Mode, ObserverConfig};
use neurofield_core::sim::{run_scenario, Scenario};
use neurofield_core::Error;

fn plant_only(v: [f64; 3], input: Box<dyn InputSignal + Send + Sync>, t_end: f64, dt: f64) -> Scenario {
    Scenario { params: params(-1.0, 1.5, 1.0), input, v0_init: v, vhat0_init: [0.0; 3], observer: None, t_end, dt }
}

#[test]
fn on_axis_run_matches_scalar_oracle() {
    let c = 0.2;
    let rec = run_scenario(&plant_only([-0.7, 0.0, 0.0], Box::new(ConstantInput([c, 0.0, 0.0])), 2.0, 1e-3));
    assert!(rec.failure.is_none());
    // ẋ = -x - tanh(10x) + c, same step size.
    let f = |x: f64| -x - (10.0 * x).tanh() + c;
    let mut x = -0.7f64;
    let h = 1e-3;
    for (i, row) in rec.rows.iter().enumerate() {
        assert!((row.v[0] - x).abs() < 1e-12, "row {i}");
        assert_eq!(row.v[1], 0.0);
        assert_eq!(row.v[2], 0.0);
        let k1 = f(x);
        let k2 = f(x + 0.5 * h * k1);
        let k3 = f(x + 0.5 * h * k2);
        let k4 = f(x + h * k3);
        x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
}

#[test]
fn record_shape_and_output_identity() {
    let rec = run_scenario(&plant_only([-3.0, 2.5, -2.0], Box::new(shifted_input()), 1.0, 1e-3));
    assert_eq!(rec.rows.len(), 1001);
    for w in rec.rows.windows(2) {
        assert!(w[1].t > w[0].t);
    }
    for row in &rec.rows {
        assert_eq!(row.y, row.v[0]);
        assert!(row.v_hat.is_none() && row.err.is_none() && row.mode.is_none());
    }
    let odd = plant_only([0.0; 3], Box::new(circular()), 0.3, 0.1);
    assert_eq!(odd.steps(), 3);
    assert_eq!(run_scenario(&odd).rows.len(), 4);
}

#[test]
fn invariant_ball_from_outside_and_inside() {
    let input = circular();
    let p = params(-1.0, 1.5, 1.0);
    let r_star = invariant_radius(&p, &input.bounds());
    for v in [[2.0f64, -2.0, 1.5], [-6.0, 1.0, 1.0], [0.1, 0.1, 0.1]] {
        let n0 = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        let rec = run_scenario(&plant_only(v, Box::new(input), 20.0, 1e-2));
        for row in &rec.rows {
            let n = (row.v[0].powi(2) + row.v[1].powi(2) + row.v[2].powi(2)).sqrt();
            assert!(n <= n0.max(r_star) + 1e-6);
        }
    }
}

fn observed(l: f64, t_end: f64, dt: f64) -> Scenario {
    let p = reference_params();
    let input = shifted_input();
    let r = invariant_radius(&p, &input.bounds()) + 1.0;
    Scenario {
        params: p,
        input: Box::new(input),
        v0_init: [-3.0, 2.5, -2.0],
        vhat0_init: [-5.0, 2.0, -1.0],
        observer: Some(ObserverConfig { inverse: InverseConfig::new(0.3, 1e-3, r).unwrap(), l }),
        t_end,
        dt,
    }
}

#[test]
fn runs_are_deterministic() {
    let a = run_scenario(&observed(15.0, 0.2, 1e-3));
    let b = run_scenario(&observed(15.0, 0.2, 1e-3));
    assert!(a.failure.is_none());
    assert_eq!(a, b);
    for row in &a.rows {
        assert_eq!(row.mode, Some(Mode::ZMode));
        assert!(row.z_hat.is_some());
        assert_eq!(row.y, row.v[0]);
    }
}

#[test]
fn halving_the_step_leaves_the_reference_plant_unchanged() {
    let run = |dt: f64| {
        let mut s = observed(15.0, 4.0, dt);
        s.observer = None;
        run_scenario(&s).last().unwrap().v
    };
    let (a, b) = (run(1e-4), run(5e-5));
    for i in 0..3 {
        assert!((a[i] - b[i]).abs() < 1e-8);
    }
}

#[test]
fn invalid_scenarios_are_reported() {
    let mut s = plant_only([0.0; 3], Box::new(circular()), 1.0, 0.0);
    assert!(matches!(run_scenario(&s).failure, Some(Error::Parameter { .. })));
    s.dt = 0.1;
    s.t_end = f64::NAN;
    assert!(matches!(run_scenario(&s).failure, Some(Error::Parameter { .. })));
}

#[test]
fn numeric_failure_keeps_the_partial_record() {
    let s = plant_only([0.1, 0.2, 0.3], Box::new(ConstantInput([f64::NAN, 0.0, 0.0])), 1.0, 0.1);
    let rec = run_scenario(&s);
    assert!(matches!(rec.failure, Some(Error::NonFinite { .. })));
    assert_eq!(rec.rows.len(), 1);
}
