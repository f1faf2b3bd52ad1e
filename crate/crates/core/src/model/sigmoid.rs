use crate::{Error, Result};

/// Highest sigmoid derivative the closed forms below provide.
pub const MAX_SIGMOID_ORDER: usize = 4;

/// Affine reshaping of the base sigmoid used by a "raw" model before it is
/// reduced to the odd form: `s1 * σ(x) + s2` for a positive sigmoid, and a
/// threshold offset `h0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmoidTransform {
    pub s1: f64,
    pub s2: f64,
    pub h0: f64,
}

impl Default for SigmoidTransform {
    fn default() -> Self {
        Self { s1: 1.0, s2: 0.0, h0: 0.0 }
    }
}

impl SigmoidTransform {
    pub fn is_identity(&self) -> bool {
        self.s1 == 1.0 && self.s2 == 0.0 && self.h0 == 0.0
    }
}

/// The odd base sigmoid `σ(x) = tanh(μ x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmoidSpec {
    /// Slope scale; `σ'(0) = μ`.
    pub mu: f64,
    pub derivative_order_max: usize,
    pub transform: SigmoidTransform,
}

impl SigmoidSpec {
    pub fn tanh(mu: f64) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::Parameter { name: "sigmoid.mu", reason: "must be positive and finite" });
        }
        Ok(Self { mu, derivative_order_max: MAX_SIGMOID_ORDER, transform: SigmoidTransform::default() })
    }

    pub fn with_transform(mut self, transform: SigmoidTransform) -> Self {
        self.transform = transform;
        self
    }

    /// `σ'(0)`, the global Lipschitz constant of `σ`.
    pub fn slope_at_zero(&self) -> f64 {
        self.mu
    }

    /// `p`-th derivative of the base sigmoid at `x`.
    pub fn eval(&self, p: usize, x: f64) -> Result<f64> {
        if p > self.derivative_order_max {
            return Err(Error::Order { what: "sigmoid derivative order", value: p, max: self.derivative_order_max });
        }
        Ok(tanh_derivatives(self.mu, x)[p])
    }
}

/// Free-function form of [`SigmoidSpec::eval`].
pub fn sigma_eval(s: &SigmoidSpec, p: usize, x: f64) -> Result<f64> {
    s.eval(p, x)
}

/// `tanh(μx)` together with its first four derivatives.
///
/// Written in terms of `T = tanh(μx)` and `S = sech²(μx) = 1 - T²`, with `S`
/// computed from `exp(-2|μx|)` so the tails keep their relative accuracy
/// instead of collapsing to `1 - 1 = 0`.
#[inline]
pub fn tanh_derivatives(mu: f64, x: f64) -> [f64; 5] {
    let (t, s) = tanh_sech2(mu * x);
    let mu2 = mu * mu;
    [
        t,
        mu * s,
        -2.0 * mu2 * t * s,
        -2.0 * mu2 * mu * s * (3.0 * s - 2.0),
        8.0 * mu2 * mu2 * t * s * (3.0 * s - 1.0),
    ]
}

/// `(tanh y, sech² y)`.
#[inline]
pub fn tanh_sech2(y: f64) -> (f64, f64) {
    let e = libm::exp(-2.0 * y.abs());
    let denom = 1.0 + e;
    let t = (1.0 - e) / denom;
    let s = 4.0 * e / (denom * denom);
    (if y < 0.0 { -t } else { t }, s)
}
