#![allow(dead_code)]

use neurofield_core::model::{
    f_cartesian, CircularInput, InputSignal, ModelParams, SelectivityDistribution, SigmoidSpec, Transformed,
};
use neurofield_core::Vec3;

pub const OMEGA: f64 = 2.0 * std::f64::consts::PI / 10.0;

pub fn params(j0: f64, j1: f64, tau: f64) -> ModelParams {
    ModelParams::new(
        j0,
        j1,
        tau,
        SigmoidSpec::tanh(10.0).unwrap(),
        SelectivityDistribution::dirac(1.0).unwrap(),
        128,
    )
    .unwrap()
}

pub fn reference_params() -> ModelParams {
    params(-1.0, 1.5, 5.0)
}

pub fn circular() -> CircularInput {
    CircularInput::new(0.1, 0.1, OMEGA)
}

/// Circular input with the threshold offset `h0 = 1` folded into `I0`.
pub fn shifted_input() -> Transformed<CircularInput> {
    Transformed::new(circular(), [1.0, 0.0, 0.0], 0.0)
}

/// Fine RK4 integration from `(t0, v)` to `t1` (forward or backward).
pub fn flow(params: &ModelParams, input: &dyn InputSignal, v: Vec3, t0: f64, t1: f64, steps: usize) -> Vec3 {
    let h = (t1 - t0) / steps as f64;
    let mut x = v;
    for i in 0..steps {
        let t = t0 + i as f64 * h;
        let add = |a: Vec3, s: f64, b: Vec3| [a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2]];
        let k1 = f_cartesian(params, input, x, t);
        let k2 = f_cartesian(params, input, add(x, 0.5 * h, k1), t + 0.5 * h);
        let k3 = f_cartesian(params, input, add(x, 0.5 * h, k2), t + 0.5 * h);
        let k4 = f_cartesian(params, input, add(x, h, k3), t + h);
        for j in 0..3 {
            x[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
    }
    x
}

/// `Γ_p^j` for a Dirac distribution at `r`, by composite Simpson on
/// `θ ∈ [-π/2, π/2]` with `σ^(p)` written through `tanh` identities.
pub fn gamma_oracle(mu: f64, p: usize, j: usize, v0: f64, rho: f64, r: f64, n: usize) -> f64 {
    let sig = |x: f64| -> f64 {
        let t = (mu * x).tanh();
        let s = 1.0 - t * t;
        match p {
            0 => t,
            1 => mu * s,
            2 => -2.0 * mu * mu * t * s,
            3 => -2.0 * mu.powi(3) * s * (1.0 - 3.0 * t * t),
            _ => 8.0 * mu.powi(4) * t * s * (2.0 - 3.0 * t * t),
        }
    };
    let a = -std::f64::consts::FRAC_PI_2;
    let b = std::f64::consts::FRAC_PI_2;
    let h = (b - a) / n as f64;
    let g = |th: f64| {
        let c = (2.0 * th).cos();
        (r * c).powi(j as i32) * sig(v0 + r * rho * c)
    };
    let mut acc = g(a) + g(b);
    for i in 1..n {
        acc += g(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0 / std::f64::consts::PI
}
