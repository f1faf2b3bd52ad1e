//! Output derivatives along the flow.
//!
//! `T_t(v) = (h, 𝓛h, 𝓛²h, 𝓛³h)` with `h(v) = v0` and `𝓛` the total time
//! derivative along `f`. In extended polar coordinates `X = (v0, ρ, ζ)` the
//! same stack is `S_t(X)`, built from
//!
//! ```text
//! F0 = k(-v0 + J0 Γ00 + I0)            (= v̇0)
//! F1 = k(-ρ + J1 Γ01 + s)              (= ρ̇),   s = I12·ζ
//! 𝓛Γ_p^j = Γ_{p+1}^j F0 + Γ_{p+1}^{j+1} F1
//! 𝓛s = İ12·ζ + (k/ρ)(|I12|² - s²)
//! ```
//!
//! with `k = 1/τ`. Near `ρ = 0` the polar formulas lose precision through
//! cancelling `1/ρ` terms, so [`t_map`] and [`l4h`] switch to Taylor
//! coefficients of the Cartesian flow there.

use crate::linalg::{dot2, norm2, wedge, Vec3, Vec4};
use crate::model::gamma::GammaTable;
use crate::model::input::{InputJet, InputSignal};
use crate::model::sigmoid::tanh_derivatives;
use crate::model::{ModelParams, PolarState};
use crate::{Error, Result};

/// Below this `|v12|`, [`t_map`] and [`l4h`] use the Cartesian Taylor route.
pub const RHO_SWITCH: f64 = 1e-4;

/// Intermediate quantities of `S_t` at one `(X, t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LieStack {
    pub x: PolarState,
    pub table: GammaTable,
    pub jet: InputJet,
    /// `v̇0`.
    pub f0: f64,
    /// `ρ̇`.
    pub f1: f64,
    /// `𝓛F0 = [S_t]_2`.
    pub lf0: f64,
    /// `𝓛F1`.
    pub lf1: f64,
    /// `[S_t]_3`.
    pub s3: f64,
    /// `I12·ζ`.
    pub s: f64,
    /// `𝓛s`.
    pub ls: f64,
}

impl LieStack {
    /// Compute the stack; `x.rho > 0` is the caller's responsibility.
    pub fn from_jet(params: &ModelParams, jet: &InputJet, x: PolarState) -> Self {
        let table = params.gamma_table(x.v0, x.rho);
        Self::with_table(params, jet, x, table)
    }

    pub fn with_table(params: &ModelParams, jet: &InputJet, x: PolarState, table: GammaTable) -> Self {
        let k = params.k();
        let (j0, j1) = (params.j0, params.j1);
        let g = &table.g;
        let i12 = jet.planar(0);
        let di12 = jet.planar(1);
        let s = dot2(i12, x.zeta);
        let q = dot2(di12, x.zeta);
        let a = dot2(i12, i12);

        let f0 = k * (-x.v0 + j0 * g[0][0] + jet.d[0][0]);
        let f1 = k * (-x.rho + j1 * g[0][1] + s);
        let ls = q + k / x.rho * (a - s * s);
        let lf0 = k * (-f0 + j0 * (g[1][0] * f0 + g[1][1] * f1) + jet.d[1][0]);
        let lf1 = k * (-f1 + j1 * (g[1][1] * f0 + g[1][2] * f1) + ls);
        let s3 = k
            * (-lf0
                + j0 * (g[1][0] * lf0
                    + g[2][0] * f0 * f0
                    + 2.0 * g[2][1] * f0 * f1
                    + g[1][1] * lf1
                    + g[2][2] * f1 * f1)
                + jet.d[2][0]);
        Self { x, table, jet: *jet, f0, f1, lf0, lf1, s3, s, ls }
    }

    /// `S_t(X) = (v0, F0, 𝓛F0, [S_t]_3)`.
    pub fn s_vec(&self) -> Vec4 {
        [self.x.v0, self.f0, self.lf0, self.s3]
    }

    /// `𝓛⁴h`, the total derivative of `[S_t]_3`.
    pub fn l4h(&self, params: &ModelParams) -> f64 {
        let k = params.k();
        let (j0, j1) = (params.j0, params.j1);
        let g = &self.table.g;
        let rho = self.x.rho;
        let jet = &self.jet;
        let (f0, f1, a_, b_, c_) = (self.f0, self.f1, self.lf0, self.lf1, self.s3);
        let i12 = jet.planar(0);
        let di12 = jet.planar(1);
        let ddi12 = jet.planar(2);
        let (s, ls) = (self.s, self.ls);
        let q = dot2(di12, self.x.zeta);
        let r2 = dot2(ddi12, self.x.zeta);
        let a = dot2(i12, i12);
        let b = dot2(i12, di12);

        let lg = |p: usize, j: usize| g[p + 1][j] * f0 + g[p + 1][j + 1] * f1;
        let lq = r2 + k / rho * (b - s * q);
        let lls = lq + k * (-f1 * (a - s * s) / (rho * rho) + (2.0 * b - 2.0 * s * ls) / rho);
        let lb = k * (-b_ + j1 * (lg(1, 1) * f0 + g[1][1] * a_ + lg(1, 2) * f1 + g[1][2] * b_) + lls);
        let inner = lg(1, 0) * a_
            + g[1][0] * c_
            + lg(2, 0) * f0 * f0
            + 2.0 * g[2][0] * f0 * a_
            + 2.0 * (lg(2, 1) * f0 * f1 + g[2][1] * a_ * f1 + g[2][1] * f0 * b_)
            + lg(1, 1) * b_
            + g[1][1] * lb
            + lg(2, 2) * f1 * f1
            + 2.0 * g[2][2] * f1 * b_;
        k * (-c_ + j0 * inner + jet.d[3][0])
    }
}

pub fn lie_stack(params: &ModelParams, input: &dyn InputSignal, x: &PolarState, t: f64) -> Result<LieStack> {
    if !(x.rho > 0.0) {
        return Err(Error::Domain { what: "rho", value: x.rho });
    }
    Ok(LieStack::from_jet(params, &input.jet(t), *x))
}

/// The extended observability map `S_t(X)`.
pub fn s_map(params: &ModelParams, input: &dyn InputSignal, x: &PolarState, t: f64) -> Result<Vec4> {
    Ok(lie_stack(params, input, x, t)?.s_vec())
}

/// Derivatives `h, 𝓛h, …, 𝓛⁴h` at `v` from Taylor coefficients of the
/// Cartesian flow. Valid for every `v`, including `v12 = 0`.
pub fn cartesian_output_jet(params: &ModelParams, jet: &InputJet, v: Vec3) -> [f64; 5] {
    let k = params.k();
    let mu = params.mu();
    let mut c = [[0.0; 3]; 5];
    c[0] = v;
    let mut factorial = 1.0;
    for m in 0..4 {
        if m > 0 {
            factorial *= m as f64;
        }
        let mut psi = [0.0; 3];
        for &(ra, rb, w) in params.quadrature().full() {
            let arg = |i: usize| c[i][0] + ra * c[i][1] + rb * c[i][2];
            let d = tanh_derivatives(mu, arg(0));
            let sm = match m {
                0 => d[0],
                1 => d[1] * arg(1),
                2 => d[1] * arg(2) + 0.5 * d[2] * arg(1) * arg(1),
                _ => {
                    let x1 = arg(1);
                    d[1] * arg(3) + d[2] * x1 * arg(2) + d[3] * x1 * x1 * x1 / 6.0
                }
            };
            psi[0] += w * sm;
            psi[1] += w * ra * sm;
            psi[2] += w * rb * sm;
        }
        let j = [params.j0, params.j1, params.j1];
        let mut next = [0.0; 3];
        for i in 0..3 {
            let f = k * (-c[m][i] + j[i] * psi[i] + jet.d[m][i] / factorial);
            next[i] = f / (m + 1) as f64;
        }
        c[m + 1] = next;
    }
    [c[0][0], c[1][0], 2.0 * c[2][0], 6.0 * c[3][0], 24.0 * c[4][0]]
}

/// `T_t(v) = (h, 𝓛h, 𝓛²h, 𝓛³h)(v, t)`.
pub fn t_map(params: &ModelParams, input: &dyn InputSignal, v: Vec3, t: f64) -> Vec4 {
    t_map_jet(params, &input.jet(t), v)
}

pub fn t_map_jet(params: &ModelParams, jet: &InputJet, v: Vec3) -> Vec4 {
    match polar_lift(v) {
        Some(x) => LieStack::from_jet(params, jet, x).s_vec(),
        None => {
            let d = cartesian_output_jet(params, jet, v);
            [d[0], d[1], d[2], d[3]]
        }
    }
}

/// `𝓛⁴h(v, t)`.
pub fn l4h(params: &ModelParams, input: &dyn InputSignal, v: Vec3, t: f64) -> f64 {
    l4h_jet(params, &input.jet(t), v)
}

pub fn l4h_jet(params: &ModelParams, jet: &InputJet, v: Vec3) -> f64 {
    match polar_lift(v) {
        Some(x) => LieStack::from_jet(params, jet, x).l4h(params),
        None => cartesian_output_jet(params, jet, v)[4],
    }
}

fn polar_lift(v: Vec3) -> Option<PolarState> {
    let rho = norm2([v[1], v[2]]);
    (rho >= RHO_SWITCH).then(|| PolarState { v0: v[0], rho, zeta: [v[1] / rho, v[2] / rho] })
}

/// Input excitation and passage quantities at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservabilityDiagnostics {
    /// `İ12 ∧ I12`.
    pub det_g: f64,
    pub delta_star: f64,
    /// `I12 ∧ İ12`.
    pub wedge: f64,
    pub c_effective: f64,
}

/// Diagnostics at `t`; `c_effective` is the input's certified lower bound on `I0`.
pub fn diagnostics(params: &ModelParams, input: &dyn InputSignal, t: f64) -> ObservabilityDiagnostics {
    let jet = input.jet(t);
    let w = wedge(jet.planar(0), jet.planar(1));
    let c = input.bounds().c;
    ObservabilityDiagnostics {
        det_g: -w,
        delta_star: delta_star(c, params.j0, params.sigmoid().slope_at_zero()),
        wedge: w,
        c_effective: c,
    }
}

/// `δ* = c / (1 + |J0| σ'(0))`.
pub fn delta_star(c: f64, j0: f64, slope: f64) -> f64 {
    c / (1.0 + j0.abs() * slope)
}

/// Upper bound `(δ*/c) · 2δ/(δ* - δ)` on the time spent in `|v0| ≤ δ`, for `τ = 1`.
pub fn t_delta(delta: f64, delta_star: f64, c: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::Domain { what: "delta", value: delta });
    }
    if !(delta < delta_star) {
        return Err(Error::Domain { what: "delta (must be below delta_star)", value: delta });
    }
    Ok(delta_star / c * 2.0 * delta / (delta_star - delta))
}

/// Extremes of the input over a uniform time grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InputScan {
    pub c_min: f64,
    pub t_c_min: f64,
    pub wedge_min: f64,
    pub t_wedge_min: f64,
}

pub fn scan_input(input: &dyn InputSignal, t0: f64, t1: f64, samples: usize) -> InputScan {
    let mut out = InputScan { c_min: f64::INFINITY, t_c_min: t0, wedge_min: f64::INFINITY, t_wedge_min: t0 };
    let n = samples.max(1);
    for i in 0..=n {
        let t = t0 + (t1 - t0) * i as f64 / n as f64;
        let jet = input.jet(t);
        if jet.d[0][0] < out.c_min {
            out.c_min = jet.d[0][0];
            out.t_c_min = t;
        }
        let w = jet.wedge().abs();
        if w < out.wedge_min {
            out.wedge_min = w;
            out.t_wedge_min = t;
        }
    }
    out
}
