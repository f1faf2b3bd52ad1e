use super::gamma::{GammaTable, Quadrature};
use super::input::{InputBounds, InputJet, InputSignal};
use super::{distribution::SelectivityDistribution, sigmoid::SigmoidSpec};
use crate::linalg::{norm2, Vec2, Vec3, Vec4};
use crate::{Error, Result};

pub const DEFAULT_THETA_NODES: usize = 128;
pub const MIN_THETA_NODES: usize = 16;

/// Parameters of the plant `τ v̇ = -v + Ψ(v) + I(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub j0: f64,
    pub j1: f64,
    pub tau: f64,
    sigmoid: SigmoidSpec,
    dist: SelectivityDistribution,
    theta_nodes: usize,
    quad: Quadrature,
}

impl ModelParams {
    pub fn new(
        j0: f64,
        j1: f64,
        tau: f64,
        sigmoid: SigmoidSpec,
        dist: SelectivityDistribution,
        theta_nodes: usize,
    ) -> Result<Self> {
        if !(j0 != 0.0 && j0.is_finite()) {
            return Err(Error::Parameter { name: "model.j0", reason: "must be finite and nonzero" });
        }
        if !(j1 > 0.0 && j1.is_finite()) {
            return Err(Error::Parameter { name: "model.j1", reason: "must be positive" });
        }
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::Parameter { name: "model.tau", reason: "must be positive" });
        }
        if theta_nodes < MIN_THETA_NODES {
            return Err(Error::Parameter { name: "model.theta_nodes", reason: "must be at least 16" });
        }
        dist.validate()?;
        let quad = Quadrature::new(&dist, theta_nodes);
        Ok(Self { j0, j1, tau, sigmoid, dist, theta_nodes, quad })
    }

    pub fn sigmoid(&self) -> &SigmoidSpec {
        &self.sigmoid
    }

    pub fn dist(&self) -> &SelectivityDistribution {
        &self.dist
    }

    pub fn theta_nodes(&self) -> usize {
        self.theta_nodes
    }

    pub fn quadrature(&self) -> &Quadrature {
        &self.quad
    }

    pub fn mu(&self) -> f64 {
        self.sigmoid.mu
    }

    /// `1/τ`.
    #[inline]
    pub fn k(&self) -> f64 {
        1.0 / self.tau
    }

    pub fn with_theta_nodes(&self, theta_nodes: usize) -> Result<Self> {
        Self::new(self.j0, self.j1, self.tau, self.sigmoid, self.dist.clone(), theta_nodes)
    }

    pub fn with_sigmoid(&self, sigmoid: SigmoidSpec) -> Self {
        Self { sigmoid, ..self.clone() }
    }

    pub fn gamma_table(&self, v0: f64, rho: f64) -> GammaTable {
        self.quad.table(self.sigmoid.mu, v0, rho)
    }
}

/// `Γ_p^j(v0, ρ)` for `p ≤ 4`, `j ≤ 3`, `ρ ≥ 0`.
pub fn gamma(params: &ModelParams, p: usize, j: usize, v0: f64, rho: f64) -> Result<f64> {
    params.quad.gamma(params.sigmoid.mu, p, j, v0, rho)
}

/// Extended polar coordinates `X = (v0, ρ, ζ)`; `ζ` need not be a unit vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarState {
    pub v0: f64,
    pub rho: f64,
    pub zeta: Vec2,
}

impl PolarState {
    pub fn new(v0: f64, rho: f64, zeta: Vec2) -> Result<Self> {
        if !(rho > 0.0) {
            return Err(Error::Domain { what: "rho", value: rho });
        }
        Ok(Self { v0, rho, zeta })
    }

    /// Polar lift of a Cartesian state with `v_{1:2} ≠ 0`.
    pub fn from_cartesian(v: Vec3) -> Result<Self> {
        let rho = norm2([v[1], v[2]]);
        if !(rho > 0.0) {
            return Err(Error::Domain { what: "|v12|", value: rho });
        }
        Ok(Self { v0: v[0], rho, zeta: [v[1] / rho, v[2] / rho] })
    }

    pub fn as_array(&self) -> Vec4 {
        [self.v0, self.rho, self.zeta[0], self.zeta[1]]
    }
}

/// Plant vector field with a precomputed input jet.
#[inline]
pub fn f_cartesian_jet(params: &ModelParams, jet: &InputJet, v: Vec3) -> Vec3 {
    let k = params.k();
    let i = jet.d[0];
    let rho = norm2([v[1], v[2]]);
    let (g00, g01) = if rho > 0.0 {
        let mut acc = (0.0, 0.0);
        for &(a, w) in params.quad.folded() {
            let s = libm::tanh(params.sigmoid.mu * (v[0] + rho * a));
            acc.0 += w * s;
            acc.1 += w * a * s;
        }
        acc
    } else {
        // Γ_0^1(v0, 0) = 0, so the radial term vanishes.
        (params.quad.gamma(params.sigmoid.mu, 0, 0, v[0], 0.0).unwrap_or(f64::NAN), 0.0)
    };
    let radial = if rho > 0.0 { params.j1 * g01 / rho } else { 0.0 };
    [
        k * (-v[0] + params.j0 * g00 + i[0]),
        k * (-v[1] + radial * v[1] + i[1]),
        k * (-v[2] + radial * v[2] + i[2]),
    ]
}

/// `f(v, t) = (1/τ)(-v + Ψ(v) + I(t))`.
pub fn f_cartesian(params: &ModelParams, input: &dyn InputSignal, v: Vec3, t: f64) -> Vec3 {
    f_cartesian_jet(params, &input.jet(t), v)
}

/// The extended polar vector field `F(X, t)`.
pub fn f_polar(params: &ModelParams, input: &dyn InputSignal, x: &PolarState, t: f64) -> Result<Vec4> {
    if !(x.rho > 0.0) {
        return Err(Error::Domain { what: "rho", value: x.rho });
    }
    let k = params.k();
    let jet = input.jet(t);
    let i = jet.d[0];
    let (g00, g01) = {
        let tab = params.gamma_table(x.v0, x.rho);
        (tab.get(0, 0), tab.get(0, 1))
    };
    let i12 = jet.planar(0);
    let s = i12[0] * x.zeta[0] + i12[1] * x.zeta[1];
    Ok([
        k * (-x.v0 + params.j0 * g00 + i[0]),
        k * (-x.rho + params.j1 * g01 + s),
        k * (i12[0] - s * x.zeta[0]) / x.rho,
        k * (i12[1] - s * x.zeta[1]) / x.rho,
    ])
}

/// Radius `R*` of the invariant attracting ball:
/// `√(J0² + 2 J1²) ∫ √(1 + r²) P(r) dr + sup ‖I‖`.
pub fn invariant_radius(params: &ModelParams, bounds: &InputBounds) -> f64 {
    let coupling = libm::sqrt(params.j0 * params.j0 + 2.0 * params.j1 * params.j1);
    coupling * params.dist.expect(|r| libm::sqrt(1.0 + r * r)) + bounds.sup_norm
}
