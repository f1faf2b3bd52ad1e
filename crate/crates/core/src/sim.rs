//! Fixed-step RK4 co-simulation of the plant and the hybrid observer.

use alloc::boxed::Box;
use alloc::vec::Vec;

use crate::linalg::{axpy, dist, is_finite, Vec3, Vec4};
use crate::model::dynamics::f_cartesian_jet;
use crate::model::input::InputSignal;
use crate::model::ModelParams;
use crate::observer::{
    config_warnings, rk4_combine, HybridObserver, Mode, ObserverConfig, StageOutputs, Switch, Warning,
};
use crate::{Error, Result};

/// One classical RK4 step of `ẋ = rhs(t, x)`.
pub fn rk4_step<const N: usize>(
    mut rhs: impl FnMut(f64, &[f64; N]) -> [f64; N],
    x: &[f64; N],
    t: f64,
    dt: f64,
) -> Result<[f64; N]> {
    let k1 = rhs(t, x);
    let k2 = rhs(t + 0.5 * dt, &axpy(x, 0.5 * dt, &k1));
    let k3 = rhs(t + 0.5 * dt, &axpy(x, 0.5 * dt, &k2));
    let k4 = rhs(t + dt, &axpy(x, dt, &k3));
    for k in [&k1, &k2, &k3, &k4] {
        if !is_finite(k) {
            return Err(Error::NonFinite { what: "RK4 stage", t });
        }
    }
    Ok(rk4_combine(x, dt, &k1, &k2, &k3, &k4))
}

/// One plant RK4 step, also returning the outputs of the stage states.
pub fn plant_step(params: &ModelParams, input: &dyn InputSignal, v: &Vec3, t: f64, dt: f64) -> Result<(Vec3, StageOutputs)> {
    let j0 = input.jet(t);
    let jm = input.jet(t + 0.5 * dt);
    let j1 = input.jet(t + dt);
    let k1 = f_cartesian_jet(params, &j0, *v);
    let s2 = axpy(v, 0.5 * dt, &k1);
    let k2 = f_cartesian_jet(params, &jm, s2);
    let s3 = axpy(v, 0.5 * dt, &k2);
    let k3 = f_cartesian_jet(params, &jm, s3);
    let s4 = axpy(v, dt, &k3);
    let k4 = f_cartesian_jet(params, &j1, s4);
    let next = rk4_combine(v, dt, &k1, &k2, &k3, &k4);
    if !is_finite(&next) {
        return Err(Error::NonFinite { what: "plant state", t: t + dt });
    }
    Ok((next, StageOutputs { stages: [v[0], s2[0], s3[0], s4[0]], end: next[0] }))
}

pub struct Scenario {
    pub params: ModelParams,
    pub input: Box<dyn InputSignal + Send + Sync>,
    pub v0_init: Vec3,
    pub vhat0_init: Vec3,
    /// `None` runs the plant alone.
    pub observer: Option<ObserverConfig>,
    pub t_end: f64,
    pub dt: f64,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Parameter { name: "sim.dt", reason: "must be positive" });
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::Parameter { name: "sim.t_end", reason: "must be positive" });
        }
        if let Some(cfg) = &self.observer {
            cfg.inverse.validate()?;
        }
        Ok(())
    }

    /// Number of steps: `floor(t_end / dt)`, tolerant to rounding of the ratio.
    pub fn steps(&self) -> usize {
        let ratio = self.t_end / self.dt;
        let n = libm::round(ratio);
        if (ratio - n).abs() < 1e-9 * n.max(1.0) {
            n as usize
        } else {
            libm::floor(ratio) as usize
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Row {
    pub t: f64,
    pub v: Vec3,
    pub y: f64,
    pub v_hat: Option<Vec3>,
    pub z_hat: Option<Vec4>,
    pub mode: Option<Mode>,
    /// `|v̂ - v|`.
    pub err: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrajectoryRecord {
    pub rows: Vec<Row>,
    pub switches: Vec<Switch>,
    pub warnings: Vec<Warning>,
    /// Set when the run stopped early; `rows` then holds the partial record.
    pub failure: Option<Error>,
}

impl TrajectoryRecord {
    pub fn last(&self) -> Option<&Row> {
        self.rows.last()
    }

    /// Largest error over rows with `t` in `[t0, t1]`.
    pub fn max_err(&self, t0: f64, t1: f64) -> Option<f64> {
        self.rows
            .iter()
            .filter(|r| r.t >= t0 && r.t <= t1)
            .filter_map(|r| r.err)
            .fold(None, |m, e| Some(m.map_or(e, |m: f64| m.max(e))))
    }
}

fn observer_row(t: f64, v: Vec3, obs: &HybridObserver<'_>) -> Row {
    let st = &obs.state;
    Row {
        t,
        v,
        y: v[0],
        v_hat: Some(st.v_hat),
        z_hat: (st.mode == Mode::ZMode).then_some(st.z_hat),
        mode: Some(st.mode),
        err: Some(dist(&st.v_hat, &v)),
    }
}

fn plant_row(t: f64, v: Vec3) -> Row {
    Row { t, v, y: v[0], v_hat: None, z_hat: None, mode: None, err: None }
}

/// Integrate plant and observer on a shared grid. Numerical failures stop
/// the run and are reported in [`TrajectoryRecord::failure`].
pub fn run_scenario(s: &Scenario) -> TrajectoryRecord {
    let mut rec = TrajectoryRecord::default();
    if let Err(e) = s.validate() {
        rec.failure = Some(e);
        return rec;
    }
    let n = s.steps();
    rec.rows.reserve(n + 1);
    let input: &dyn InputSignal = &*s.input;
    let params = &s.params;
    let mut v = s.v0_init;

    let Some(cfg) = s.observer else {
        rec.rows.push(plant_row(0.0, v));
        for i in 0..n {
            let t = i as f64 * s.dt;
            match plant_step(params, input, &v, t, s.dt) {
                Ok((next, _)) => v = next,
                Err(e) => {
                    rec.failure = Some(e);
                    return rec;
                }
            }
            rec.rows.push(plant_row((i + 1) as f64 * s.dt, v));
        }
        return rec;
    };

    rec.warnings = config_warnings(&cfg, params, input);
    // The first plant step is taken before the observer exists so that a
    // start exactly on |y| = δ can be classified by the next sample.
    let first = match plant_step(params, input, &v, 0.0, s.dt) {
        Ok(x) => x,
        Err(e) => {
            rec.failure = Some(e);
            return rec;
        }
    };
    let mut obs = match HybridObserver::new(cfg, params, input, s.vhat0_init, v[0], first.1.end) {
        Ok(o) => o,
        Err(e) => {
            rec.failure = Some(e);
            return rec;
        }
    };
    rec.rows.push(observer_row(0.0, v, &obs));
    let mut pending = Some(first);
    for i in 0..n {
        let t = i as f64 * s.dt;
        let step = match pending.take() {
            Some(x) => Ok(x),
            None => plant_step(params, input, &v, t, s.dt),
        };
        let (next, outputs) = match step {
            Ok(x) => x,
            Err(e) => {
                rec.failure = Some(e);
                break;
            }
        };
        if let Err(e) = obs.step(&outputs, t, s.dt) {
            rec.failure = Some(e);
            break;
        }
        v = next;
        rec.rows.push(observer_row((i + 1) as f64 * s.dt, v, &obs));
    }
    rec.switches = obs.state.switches.clone();
    rec
}
