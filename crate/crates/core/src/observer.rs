//! Hybrid high-gain observer.
//!
//! While `|y| ≥ δ` the observer runs in the embedded coordinates
//!
//! ```text
//! ż = A z + 𝓛⁴h(𝔗_t(z), t) W - P_l⁻¹ Cᵀ (z0 - y)
//! ```
//!
//! and reports `v̂ = 𝔗_t(z)`. While `|y| < δ` it runs an open-loop copy of the
//! plant, `v̂̇ = f(v̂, t)`. Entering the open-loop mode sets `v̂ = 𝔗_t(ẑ)`;
//! leaving it sets `ẑ = T_t(v̂)`.

use alloc::vec::Vec;

use crate::inverse::{pseudo_inverse_hinted, pseudo_inverse_jet, InverseConfig, InverseInput, Sign};
use crate::linalg::{axpy, invert4, is_finite, Mat4, Vec3, Vec4};
use crate::model::dynamics::f_cartesian_jet;
use crate::model::input::{InputJet, InputSignal};
use crate::model::ModelParams;
use crate::observability::{delta_star, l4h_jet, t_map_jet};
use crate::{Error, Result};

/// The gain `K = P_l⁻¹ Cᵀ` and the matrix it is built from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainMatrix {
    pub l: f64,
    pub p: Mat4,
    pub p_inv: Mat4,
    pub k: Vec4,
}

/// `P_l(i,j) = (-1)^{i+j} / l^{i+j-1} · (i+j-2)! / ((i-1)!(j-1)!)`, `i, j = 1..4`.
pub fn gain_matrix(l: f64) -> Result<GainMatrix> {
    if !(l >= 1.0 && l.is_finite()) {
        return Err(Error::Parameter { name: "observer.l", reason: "must be at least 1" });
    }
    let fact = |n: usize| (1..=n).map(|x| x as f64).product::<f64>();
    let mut p = [[0.0; 4]; 4];
    for (i, row) in p.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            // Zero-based i, j: sign (-1)^{i+j}, power i+j+1, binomial (i+j)!/(i! j!).
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            *cell = sign / libm::pow(l, (i + j + 1) as f64) * fact(i + j) / (fact(i) * fact(j));
        }
    }
    let p_inv = invert4(&p).ok_or(Error::Parameter { name: "observer.l", reason: "P_l is singular" })?;
    let k = [p_inv[0][0], p_inv[1][0], p_inv[2][0], p_inv[3][0]];
    Ok(GainMatrix { l, p, p_inv, k })
}

/// The shift matrix `A` (ones on the superdiagonal).
pub fn shift_matrix() -> Mat4 {
    let mut a = [[0.0; 4]; 4];
    for i in 0..3 {
        a[i][i + 1] = 1.0;
    }
    a
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObserverConfig {
    pub inverse: InverseConfig,
    /// High-gain parameter `l ≥ 1`.
    pub l: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    ZMode,
    VMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwitchDirection {
    ToVMode,
    ToZMode,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Switch {
    pub t: f64,
    pub direction: SwitchDirection,
}

/// Maximum number of mode switches allowed in one run.
pub const MAX_SWITCHES: usize = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct ObserverState {
    pub mode: Mode,
    /// Embedded state; meaningful in [`Mode::ZMode`], frozen otherwise.
    pub z_hat: Vec4,
    pub v_hat: Vec3,
    pub switches: Vec<Switch>,
    /// Whether `|y| ≥ δ` at the last step boundary.
    pub above: bool,
    /// `ρ` recovered by the last inversion; seeds the next radial solve.
    pub rho_hint: Option<f64>,
    /// Whether `v_hat = 𝔗_t(z_hat)` at the current boundary, so the first
    /// RK4 stage can reuse it.
    pub v_hat_current: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Warning {
    /// `J0 > 0` and `δ ≥ δ*`: the passage estimate does not cover this `δ`.
    DeltaAboveDeltaStar { delta: f64, delta_star: f64 },
}

/// Plant outputs seen by one observer step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageOutputs {
    /// Outputs of the plant's four RK4 stage states (times `t, t+dt/2, t+dt/2, t+dt`).
    pub stages: [f64; 4],
    /// `y(t + dt)` after the plant step; decides mode switches.
    pub end: f64,
}

/// Stage outputs for a zero-order hold of `y`.
pub fn held(y: f64) -> StageOutputs {
    StageOutputs { stages: [y; 4], end: y }
}

/// `A z + 𝓛⁴h(𝔗(z)) W - K (z0 - y)` with a precomputed input.
pub fn z_mode_rhs_jet(
    cfg: &ObserverConfig,
    params: &ModelParams,
    inp: &InverseInput,
    gain: &GainMatrix,
    z: Vec4,
    y: f64,
) -> Result<Vec4> {
    let v = pseudo_inverse_jet(&cfg.inverse, params, inp, z, Sign::of(y))?;
    Ok(z_mode_rhs_at(params, inp, gain, z, y, v))
}

/// The z-mode field given `v = 𝔗_t(z)`.
fn z_mode_rhs_at(params: &ModelParams, inp: &InverseInput, gain: &GainMatrix, z: Vec4, y: f64, v: Vec3) -> Vec4 {
    let lie = l4h_jet(params, &inp.jet, v);
    let e = z[0] - y;
    [
        z[1] - gain.k[0] * e,
        z[2] - gain.k[1] * e,
        z[3] - gain.k[2] * e,
        lie - gain.k[3] * e,
    ]
}

pub fn z_mode_rhs(
    cfg: &ObserverConfig,
    params: &ModelParams,
    input: &dyn InputSignal,
    gain: &GainMatrix,
    z: Vec4,
    y: f64,
    t: f64,
) -> Result<Vec4> {
    z_mode_rhs_jet(cfg, params, &InverseInput::at(input, t), gain, z, y)
}

/// Open-loop copy of the plant.
pub fn v_mode_rhs(params: &ModelParams, input: &dyn InputSignal, v_hat: Vec3, t: f64) -> Vec3 {
    f_cartesian_jet(params, &input.jet(t), v_hat)
}

impl ObserverState {
    /// Initial state: `ẑ(0) = T_0(v̂(0))`, mode from `|y(0)| - δ`, or from
    /// `|y(dt)| - δ` when `|y(0)| = δ` exactly.
    pub fn new(
        cfg: &ObserverConfig,
        params: &ModelParams,
        input: &dyn InputSignal,
        v_hat0: Vec3,
        y0: f64,
        y_next: f64,
    ) -> Result<Self> {
        let delta = cfg.inverse.delta;
        let above = if y0.abs() == delta { y_next.abs() >= delta } else { y0.abs() > delta };
        let jet = input.jet(0.0);
        let z_hat = t_map_jet(params, &jet, v_hat0);
        let (mode, v_hat, rho_hint) = if above {
            let inp = InverseInput::from_jet(jet, input.bounds().mu_wedge);
            let (v, rho) = pseudo_inverse_hinted(&cfg.inverse, params, &inp, z_hat, Sign::of(y0), None)?;
            (Mode::ZMode, v, Some(rho))
        } else {
            (Mode::VMode, v_hat0, None)
        };
        if !is_finite(&z_hat) || !is_finite(&v_hat) {
            return Err(Error::NonFinite { what: "initial observer state", t: 0.0 });
        }
        Ok(Self { mode, z_hat, v_hat, switches: Vec::new(), above, rho_hint, v_hat_current: above })
    }
}

/// Configuration warnings for a run.
pub fn config_warnings(cfg: &ObserverConfig, params: &ModelParams, input: &dyn InputSignal) -> Vec<Warning> {
    let mut out = Vec::new();
    let ds = delta_star(input.bounds().c, params.j0, params.sigmoid().slope_at_zero());
    if params.j0 > 0.0 && cfg.inverse.delta >= ds {
        out.push(Warning::DeltaAboveDeltaStar { delta: cfg.inverse.delta, delta_star: ds });
    }
    out
}

/// Advance the observer by one RK4 step from `t` to `t + dt`, then apply a
/// mode switch if `|y| - δ` changed sign over the step.
#[allow(clippy::too_many_arguments)]
pub fn step_observer(
    state: &mut ObserverState,
    cfg: &ObserverConfig,
    params: &ModelParams,
    input: &dyn InputSignal,
    gain: &GainMatrix,
    outputs: &StageOutputs,
    t: f64,
    dt: f64,
) -> Result<()> {
    let y = &outputs.stages;
    let mu_wedge = input.bounds().mu_wedge;
    let jets = [input.jet(t), input.jet(t + 0.5 * dt), input.jet(t + dt)];
    let t_new = t + dt;
    match state.mode {
        Mode::ZMode => {
            let inps = jets.map(|j| InverseInput::from_jet(j, mu_wedge));
            let z = state.z_hat;
            let mut hint = state.rho_hint;
            let mut stage = |inp: &InverseInput, zs: Vec4, ys: f64| -> Result<Vec4> {
                let (v, rho) = pseudo_inverse_hinted(&cfg.inverse, params, inp, zs, Sign::of(ys), hint)?;
                hint = Some(rho);
                Ok(z_mode_rhs_at(params, inp, gain, zs, ys, v))
            };
            let k1 = if state.v_hat_current {
                z_mode_rhs_at(params, &inps[0], gain, z, y[0], state.v_hat)
            } else {
                stage(&inps[0], z, y[0])?
            };
            let k2 = stage(&inps[1], axpy(&z, 0.5 * dt, &k1), y[1])?;
            let k3 = stage(&inps[1], axpy(&z, 0.5 * dt, &k2), y[2])?;
            let k4 = stage(&inps[2], axpy(&z, dt, &k3), y[3])?;
            state.z_hat = rk4_combine(&z, dt, &k1, &k2, &k3, &k4);
            if !is_finite(&state.z_hat) {
                return Err(Error::NonFinite { what: "z_hat", t: t_new });
            }
            let (v, rho) =
                pseudo_inverse_hinted(&cfg.inverse, params, &inps[2], state.z_hat, Sign::of(outputs.end), hint)?;
            state.v_hat = v;
            state.rho_hint = Some(rho);
            state.v_hat_current = true;
        }
        Mode::VMode => {
            let v = state.v_hat;
            let k1 = f_cartesian_jet(params, &jets[0], v);
            let k2 = f_cartesian_jet(params, &jets[1], axpy(&v, 0.5 * dt, &k1));
            let k3 = f_cartesian_jet(params, &jets[1], axpy(&v, 0.5 * dt, &k2));
            let k4 = f_cartesian_jet(params, &jets[2], axpy(&v, dt, &k3));
            state.v_hat = rk4_combine(&v, dt, &k1, &k2, &k3, &k4);
        }
    }
    if !is_finite(&state.v_hat) {
        return Err(Error::NonFinite { what: "v_hat", t: t_new });
    }
    let above = outputs.end.abs() >= cfg.inverse.delta;
    if above != state.above {
        state.above = above;
        apply_switch(state, params, &jets[2], above, t_new)?;
    }
    Ok(())
}

fn apply_switch(state: &mut ObserverState, params: &ModelParams, jet: &InputJet, above: bool, t: f64) -> Result<()> {
    let direction = match (state.mode, above) {
        (Mode::ZMode, false) => {
            // v_hat already holds 𝔗_t(ẑ) at this boundary.
            state.mode = Mode::VMode;
            SwitchDirection::ToVMode
        }
        (Mode::VMode, true) => {
            state.z_hat = t_map_jet(params, jet, state.v_hat);
            state.v_hat_current = false;
            state.mode = Mode::ZMode;
            SwitchDirection::ToZMode
        }
        _ => return Ok(()),
    };
    state.switches.push(Switch { t, direction });
    if state.switches.len() > MAX_SWITCHES {
        return Err(Error::TooManySwitches { t, count: state.switches.len() });
    }
    Ok(())
}

/// Classical RK4 combination `x + dt/6 (k1 + 2k2 + 2k3 + k4)`.
#[inline]
pub fn rk4_combine<const N: usize>(
    x: &[f64; N],
    dt: f64,
    k1: &[f64; N],
    k2: &[f64; N],
    k3: &[f64; N],
    k4: &[f64; N],
) -> [f64; N] {
    let mut out = *x;
    for i in 0..N {
        out[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

/// An observer bound to one plant model and input.
pub struct HybridObserver<'a> {
    pub cfg: ObserverConfig,
    pub params: &'a ModelParams,
    pub input: &'a dyn InputSignal,
    pub gain: GainMatrix,
    pub state: ObserverState,
}

impl<'a> HybridObserver<'a> {
    pub fn new(
        cfg: ObserverConfig,
        params: &'a ModelParams,
        input: &'a dyn InputSignal,
        v_hat0: Vec3,
        y0: f64,
        y_next: f64,
    ) -> Result<Self> {
        cfg.inverse.validate()?;
        let gain = gain_matrix(cfg.l)?;
        let state = ObserverState::new(&cfg, params, input, v_hat0, y0, y_next)?;
        Ok(Self { cfg, params, input, gain, state })
    }

    pub fn step(&mut self, y: &StageOutputs, t: f64, dt: f64) -> Result<()> {
        step_observer(&mut self.state, &self.cfg, self.params, self.input, &self.gain, y, t, dt)
    }

    pub fn warnings(&self) -> Vec<Warning> {
        config_warnings(&self.cfg, self.params, self.input)
    }
}
