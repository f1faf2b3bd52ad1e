use crate::linalg::{norm, wedge, Vec2, Vec3};

/// Number of time derivatives carried by an [`InputJet`] (orders `0..=5`).
///
/// The observer needs orders up to 3; the extra orders let a
/// [`Transformed`] input with a nonzero `lead` still provide order 4.
pub const JET_LEN: usize = 6;

/// `I(t)` and its time derivatives: `d[k]` is the `k`-th derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InputJet {
    pub d: [Vec3; JET_LEN],
}

impl InputJet {
    pub fn value(&self) -> Vec3 {
        self.d[0]
    }

    /// Orientation part `I_{1:2}` of the `k`-th derivative.
    #[inline]
    pub fn planar(&self, k: usize) -> Vec2 {
        [self.d[k][1], self.d[k][2]]
    }

    /// `I_{1:2} ∧ İ_{1:2}`.
    pub fn wedge(&self) -> f64 {
        wedge(self.planar(0), self.planar(1))
    }
}

/// Certified bounds of an input signal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InputBounds {
    /// Lower bound on `I0(t)`.
    pub c: f64,
    /// Lower bound on `|I_{1:2} ∧ İ_{1:2}|`.
    pub mu_wedge: f64,
    /// Upper bound on `‖I(t)‖`.
    pub sup_norm: f64,
    /// Whether the bounds are analytic or estimated from samples.
    pub exact: bool,
}

/// A smooth external input `t ↦ I(t) ∈ ℝ³`.
pub trait InputSignal {
    fn jet(&self, t: f64) -> InputJet;
    fn bounds(&self) -> InputBounds;
}

impl<S: InputSignal + ?Sized> InputSignal for &S {
    fn jet(&self, t: f64) -> InputJet {
        (**self).jet(t)
    }
    fn bounds(&self) -> InputBounds {
        (**self).bounds()
    }
}

/// `I0 = ε(1-β) + A sin(ω0 t)`, `I_{1:2} = βε (cos ωt, sin ωt)`.
///
/// With `A = 0` this is the rotating stimulus of the reference experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircularInput {
    pub epsilon: f64,
    pub beta: f64,
    pub omega: f64,
    /// Amplitude of the optional `I0` modulation.
    pub i0_amp: f64,
    pub i0_omega: f64,
}

impl CircularInput {
    pub fn new(epsilon: f64, beta: f64, omega: f64) -> Self {
        Self { epsilon, beta, omega, i0_amp: 0.0, i0_omega: 0.0 }
    }

    pub fn with_modulation(mut self, amp: f64, omega: f64) -> Self {
        self.i0_amp = amp;
        self.i0_omega = omega;
        self
    }
}

/// `k`-th derivative of `(cos wt, sin wt)` given `(cos wt, sin wt)`.
#[inline]
fn rotating_derivative(c: f64, s: f64, w: f64, k: usize) -> Vec2 {
    let scale = libm::pow(w, k as f64);
    let (x, y) = match k % 4 {
        0 => (c, s),
        1 => (-s, c),
        2 => (-c, -s),
        _ => (s, -c),
    };
    [scale * x, scale * y]
}

impl InputSignal for CircularInput {
    fn jet(&self, t: f64) -> InputJet {
        let amp = self.beta * self.epsilon;
        let (s, c) = libm::sincos(self.omega * t);
        let (s0, c0) = libm::sincos(self.i0_omega * t);
        let mut d = [[0.0; 3]; JET_LEN];
        for (k, dk) in d.iter_mut().enumerate() {
            let p = rotating_derivative(c, s, self.omega, k);
            // sin is the y-component of the rotating vector.
            let m = rotating_derivative(c0, s0, self.i0_omega, k)[1];
            dk[0] = self.i0_amp * m;
            dk[1] = amp * p[0];
            dk[2] = amp * p[1];
        }
        d[0][0] += self.epsilon * (1.0 - self.beta);
        InputJet { d }
    }

    fn bounds(&self) -> InputBounds {
        let base = self.epsilon * (1.0 - self.beta);
        let amp = self.beta * self.epsilon;
        let a = self.i0_amp.abs();
        InputBounds {
            c: base - a,
            mu_wedge: amp * amp * self.omega.abs(),
            sup_norm: libm::hypot(base.abs() + a, amp),
            exact: true,
        }
    }
}

/// Time-independent input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantInput(pub Vec3);

impl InputSignal for ConstantInput {
    fn jet(&self, _t: f64) -> InputJet {
        let mut d = [[0.0; 3]; JET_LEN];
        d[0] = self.0;
        InputJet { d }
    }

    fn bounds(&self) -> InputBounds {
        InputBounds { c: self.0[0], mu_wedge: 0.0, sup_norm: norm(&self.0), exact: true }
    }
}

/// `I(t) + offset + lead · İ(t)`, the effective input produced by the
/// model reductions in [`crate::model::transform`].
#[derive(Debug, Clone, PartialEq)]
pub struct Transformed<S> {
    pub inner: S,
    pub offset: Vec3,
    pub lead: f64,
    bounds: InputBounds,
}

/// Time window and resolution used to estimate bounds when `lead ≠ 0`.
const BOUND_WINDOW: f64 = 100.0;
const BOUND_SAMPLES: usize = 20_000;

impl<S: InputSignal> Transformed<S> {
    pub fn new(inner: S, offset: Vec3, lead: f64) -> Self {
        let b = inner.bounds();
        let bounds = if lead == 0.0 {
            InputBounds {
                c: b.c + offset[0],
                mu_wedge: b.mu_wedge,
                sup_norm: b.sup_norm + norm(&offset),
                exact: b.exact,
            }
        } else {
            let mut est = InputBounds { c: f64::INFINITY, mu_wedge: f64::INFINITY, sup_norm: 0.0, exact: false };
            let mut probe = Self { inner, offset, lead, bounds: est };
            for i in 0..=BOUND_SAMPLES {
                let t = BOUND_WINDOW * i as f64 / BOUND_SAMPLES as f64;
                let j = probe.jet(t);
                est.c = est.c.min(j.d[0][0]);
                est.mu_wedge = est.mu_wedge.min(j.wedge().abs());
                est.sup_norm = est.sup_norm.max(norm(&j.d[0]));
            }
            probe.bounds = est;
            return probe;
        };
        Self { inner, offset, lead, bounds }
    }
}

impl<S: InputSignal> InputSignal for Transformed<S> {
    fn jet(&self, t: f64) -> InputJet {
        let inner = self.inner.jet(t);
        let mut d = inner.d;
        for k in 0..JET_LEN - 1 {
            for i in 0..3 {
                d[k][i] += self.lead * inner.d[k + 1][i];
            }
        }
        if self.lead != 0.0 {
            // The top order would need one more inner derivative.
            d[JET_LEN - 1] = [f64::NAN; 3];
        }
        for i in 0..3 {
            d[0][i] += self.offset[i];
        }
        InputJet { d }
    }

    fn bounds(&self) -> InputBounds {
        self.bounds
    }
}
