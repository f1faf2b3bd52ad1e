//! Lipschitz pseudo-inverse `𝔗_t = Φ ∘ Sat ∘ S_t⁻¹ ∘ Π_t` of the
//! observability map.
//!
//! `Π_t` moves `z` into a set where `S_t⁻¹` is well defined: `z0` into
//! `δ ≤ ±z0 ≤ R` (sign taken from the measured output) and `z1` into the band
//! of values `F0` can take for `ρ ∈ [η, R]`. `S_t⁻¹` then recovers
//! `ρ` from a monotone scalar equation, the radial velocity from `z2`, `𝓛s`
//! from `z3` and `ζ` from a 2x2 system driven by `I12 ∧ İ12`.

use crate::linalg::{dot2, wedge, Vec3, Vec4};
use crate::model::input::{InputJet, InputSignal};
use crate::model::{ModelParams, PolarState};
use crate::{Error, Result};

/// Smallest `|Γ_1^1|` the inversion divides by.
pub const GAMMA11_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InverseConfig {
    /// Output floor `δ`.
    pub delta: f64,
    /// Radial floor `η`.
    pub eta: f64,
    /// Ball radius `R`.
    pub r: f64,
    pub rho_tol: f64,
    pub max_iter: usize,
}

impl InverseConfig {
    pub fn new(delta: f64, eta: f64, r: f64) -> Result<Self> {
        let cfg = Self { delta, eta, r, rho_tol: 1e-12, max_iter: 200 };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::Parameter { name: "observer.delta", reason: "must be positive" });
        }
        if !(self.eta > 0.0 && self.eta < self.r && self.r.is_finite()) {
            return Err(Error::Parameter { name: "observer.eta", reason: "need 0 < eta < R" });
        }
        if !(self.delta < self.r) {
            return Err(Error::Parameter { name: "observer.delta", reason: "need delta < R" });
        }
        if !(self.rho_tol > 0.0) {
            return Err(Error::Parameter { name: "observer.rho_tol", reason: "must be positive" });
        }
        if self.max_iter == 0 {
            return Err(Error::Parameter { name: "observer.max_iter", reason: "must be positive" });
        }
        Ok(())
    }

    pub fn bump(&self) -> BumpSpec {
        BumpSpec { r: self.r }
    }
}

/// Smooth cut-off equal to 1 on `[0, R-1]` and 0 beyond `R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpSpec {
    pub r: f64,
}

impl BumpSpec {
    /// Quintic smoothstep profile.
    pub fn eval(&self, x: f64) -> f64 {
        let x = x.abs();
        if x <= self.r - 1.0 {
            1.0
        } else if x >= self.r {
            0.0
        } else {
            let u = self.r - x;
            u * u * u * (10.0 + u * (-15.0 + 6.0 * u))
        }
    }
}

/// Sign of the measured output; zero counts as positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Pos,
    Neg,
}

impl Sign {
    pub fn of(y: f64) -> Self {
        if y >= 0.0 {
            Sign::Pos
        } else {
            Sign::Neg
        }
    }
}

/// Input-side data the inverse needs at one time.
#[derive(Debug, Clone, Copy)]
pub struct InverseInput {
    pub jet: InputJet,
    /// Threshold below which `|I12 ∧ İ12|` is treated as singular.
    pub wedge_threshold: f64,
}

impl InverseInput {
    pub fn at(input: &dyn InputSignal, t: f64) -> Self {
        Self::from_jet(input.jet(t), input.bounds().mu_wedge)
    }

    pub fn from_jet(jet: InputJet, mu_wedge: f64) -> Self {
        Self { jet, wedge_threshold: 0.5 * mu_wedge }
    }
}

fn clamp(x: f64, lo: f64, hi: f64) -> f64 {
    if x < lo {
        lo
    } else if x > hi {
        hi
    } else {
        x
    }
}

/// `Γ_0^0(z0, η)` and `Γ_0^0(z0, R)`, the ends of the band `Π_t` clamps into.
fn band_gammas(cfg: &InverseConfig, params: &ModelParams, z0: f64) -> (f64, f64) {
    let quad = params.quadrature();
    (quad.g00_g11(params.mu(), z0, cfg.eta).0, quad.g00_g11(params.mu(), z0, cfg.r).0)
}

fn clamp_z0(cfg: &InverseConfig, z0: f64, sign: Sign) -> f64 {
    match sign {
        Sign::Pos => clamp(z0, cfg.delta, cfg.r),
        Sign::Neg => clamp(z0, -cfg.r, -cfg.delta),
    }
}

/// Clamp `z1` into `[k(J0 Γ_0^0(z0, ·) - z0 + I0)]` over `ρ ∈ {η, R}`.
fn clamp_z1(params: &ModelParams, jet: &InputJet, z0: f64, z1: f64, g_eta: f64, g_r: f64) -> f64 {
    let k = params.k();
    let e_eta = k * (params.j0 * g_eta - z0 + jet.d[0][0]);
    let e_r = k * (params.j0 * g_r - z0 + jet.d[0][0]);
    clamp(z1, e_eta.min(e_r), e_eta.max(e_r))
}

/// `Π_t(z)` for a given input jet.
pub fn project_pi_jet(cfg: &InverseConfig, params: &ModelParams, jet: &InputJet, z: Vec4, sign: Sign) -> Vec4 {
    let z0 = clamp_z0(cfg, z[0], sign);
    let (g_eta, g_r) = band_gammas(cfg, params, z0);
    [z0, clamp_z1(params, jet, z0, z[1], g_eta, g_r), z[2], z[3]]
}

pub fn project_pi(
    cfg: &InverseConfig,
    params: &ModelParams,
    input: &dyn InputSignal,
    z: Vec4,
    sign: Sign,
    t: f64,
) -> Vec4 {
    project_pi_jet(cfg, params, &input.jet(t), z, sign)
}

/// The unique `ρ ∈ [η, R]` with `J0 Γ_0^0(v0, ρ) = w`, where
/// `w = τ z1 + v0 - I0`.
///
/// Newton steps on the monotone map, safeguarded by a shrinking bracket; a
/// step that leaves the bracket or stalls is replaced by bisection. If `w`
/// lies outside the band (rounding only, after `Π`), the nearer endpoint is
/// returned.
pub fn solve_rho(cfg: &InverseConfig, params: &ModelParams, v0: f64, w: f64) -> Result<f64> {
    let (g_eta, g_r) = band_gammas(cfg, params, v0);
    solve_rho_bracketed(cfg, params, v0, w, (g_eta, g_r), None)
}

/// [`solve_rho`] with `Γ_0^0` at both ends already known and an optional
/// starting point.
fn solve_rho_bracketed(
    cfg: &InverseConfig,
    params: &ModelParams,
    v0: f64,
    w: f64,
    (g_eta, g_r): (f64, f64),
    hint: Option<f64>,
) -> Result<f64> {
    let quad = params.quadrature();
    let mu = params.mu();
    let j0 = params.j0;
    let eval = |rho: f64| {
        let (g00, g11) = quad.g00_g11(mu, v0, rho);
        (j0 * g00 - w, j0 * g11)
    };
    let (lo, hi) = (cfg.eta, cfg.r);
    let g_lo = j0 * g_eta - w;
    let g_hi = j0 * g_r - w;
    if g_lo == 0.0 {
        return Ok(lo);
    }
    if g_hi == 0.0 {
        return Ok(hi);
    }
    if (g_lo > 0.0) == (g_hi > 0.0) {
        return Ok(if g_lo.abs() <= g_hi.abs() { lo } else { hi });
    }
    // Orient so that g(xl) < 0 < g(xh).
    let (mut xl, mut xh) = if g_lo < 0.0 { (lo, hi) } else { (hi, lo) };
    let mut rho = match hint {
        Some(h) if h > lo && h < hi => h,
        _ => lo + (hi - lo) * g_lo / (g_lo - g_hi),
    };
    let mut dx_old = (hi - lo).abs();
    let mut dx = dx_old;
    let (mut g, mut dg) = eval(rho);
    for _ in 0..cfg.max_iter {
        if g == 0.0 {
            return Ok(rho);
        }
        if g < 0.0 {
            xl = rho;
        } else {
            xh = rho;
        }
        let newton_ok = dg != 0.0
            && ((rho - xh) * dg - g) * ((rho - xl) * dg - g) < 0.0
            && (2.0 * g).abs() <= (dx_old * dg).abs();
        dx_old = dx;
        if newton_ok {
            dx = g / dg;
            rho -= dx;
        } else {
            dx = 0.5 * (xh - xl);
            rho = xl + dx;
        }
        if dx.abs() < cfg.rho_tol {
            return Ok(rho);
        }
        (g, dg) = eval(rho);
    }
    Err(Error::NoConvergence { what: "radial root find", iterations: cfg.max_iter })
}

/// `S_t⁻¹(z)` for `z` in the image of `Π_t`.
pub fn invert_s_jet(cfg: &InverseConfig, params: &ModelParams, inp: &InverseInput, z: Vec4) -> Result<PolarState> {
    invert_s_inner(cfg, params, inp, z, band_gammas(cfg, params, z[0]), None)
}

fn invert_s_inner(
    cfg: &InverseConfig,
    params: &ModelParams,
    inp: &InverseInput,
    z: Vec4,
    band: (f64, f64),
    hint: Option<f64>,
) -> Result<PolarState> {
    let k = params.k();
    let tau = params.tau;
    let (j0, j1) = (params.j0, params.j1);
    let jet = &inp.jet;
    let v0 = z[0];
    let f0 = z[1];
    let a_ = z[2];
    let w = tau * f0 + v0 - jet.d[0][0];
    let rho = solve_rho_bracketed(cfg, params, v0, w, band, hint)?;
    let tab = params.gamma_table(v0, rho);
    let g = &tab.g;
    let denom = j0 * g[1][1];
    if !(denom.abs() >= GAMMA11_FLOOR) {
        return Err(Error::Singularity { v0, rho });
    }
    let f1 = (tau * a_ + f0 - j0 * g[1][0] * f0 - jet.d[1][0]) / denom;
    let s = tau * f1 + rho - j1 * g[0][1];
    let b_ = (tau * z[3] + a_
        - j0 * (g[1][0] * a_ + g[2][0] * f0 * f0 + 2.0 * g[2][1] * f0 * f1 + g[2][2] * f1 * f1)
        - jet.d[2][0])
        / denom;
    let ls = tau * b_ + f1 - j1 * (g[1][1] * f0 + g[1][2] * f1);
    let i12 = jet.planar(0);
    let di12 = jet.planar(1);
    let q = ls - k / rho * (dot2(i12, i12) - s * s);
    let det = wedge(i12, di12);
    if det == 0.0 || det.abs() < inp.wedge_threshold {
        return Err(Error::SingularSystem { wedge: det.abs(), threshold: inp.wedge_threshold });
    }
    let zeta = [(s * di12[1] - i12[1] * q) / det, (i12[0] * q - di12[0] * s) / det];
    Ok(PolarState { v0, rho, zeta })
}

pub fn invert_s(
    cfg: &InverseConfig,
    params: &ModelParams,
    input: &dyn InputSignal,
    z: Vec4,
    t: f64,
) -> Result<PolarState> {
    invert_s_jet(cfg, params, &InverseInput::at(input, t), z)
}

/// `Sat(X) = (v0, ρ, p(|ζ|) ζ)`.
pub fn saturate(bump: &BumpSpec, x: &PolarState) -> PolarState {
    let n = libm::hypot(x.zeta[0], x.zeta[1]);
    let p = if n.is_finite() { bump.eval(n) } else { 0.0 };
    let zeta = if p == 0.0 { [0.0, 0.0] } else { [p * x.zeta[0], p * x.zeta[1]] };
    PolarState { zeta, ..*x }
}

/// `Φ(X) = (v0, ρ ζ1, ρ ζ2)`.
pub fn phi(x: &PolarState) -> Vec3 {
    [x.v0, x.rho * x.zeta[0], x.rho * x.zeta[1]]
}

pub fn pseudo_inverse_jet(
    cfg: &InverseConfig,
    params: &ModelParams,
    inp: &InverseInput,
    z: Vec4,
    sign: Sign,
) -> Result<Vec3> {
    Ok(pseudo_inverse_hinted(cfg, params, inp, z, sign, None)?.0)
}

/// `𝔗_t(z)` and the recovered `ρ`, starting the radial solve at `hint`.
pub fn pseudo_inverse_hinted(
    cfg: &InverseConfig,
    params: &ModelParams,
    inp: &InverseInput,
    z: Vec4,
    sign: Sign,
    hint: Option<f64>,
) -> Result<(Vec3, f64)> {
    let z0 = clamp_z0(cfg, z[0], sign);
    let band = band_gammas(cfg, params, z0);
    let z1 = clamp_z1(params, &inp.jet, z0, z[1], band.0, band.1);
    let x = invert_s_inner(cfg, params, inp, [z0, z1, z[2], z[3]], band, hint)?;
    Ok((phi(&saturate(&cfg.bump(), &x)), x.rho))
}

/// `𝔗_t(z)`, with `Π_t` oriented by the sign of the measured output.
pub fn pseudo_inverse(
    cfg: &InverseConfig,
    params: &ModelParams,
    input: &dyn InputSignal,
    z: Vec4,
    sign: Sign,
    t: f64,
) -> Result<Vec3> {
    pseudo_inverse_jet(cfg, params, &InverseInput::at(input, t), z, sign)
}
