//! The `Γ_p^j` family
//!
//! ```text
//! Γ_p^j(v0, ρ) = (1/π) ∫∫ (r cos 2θ)^j σ^(p)(v0 + rρ cos 2θ) P(r) dθ dr,  θ ∈ [-π/2, π/2)
//! ```
//!
//! evaluated with the periodic trapezoidal rule in `θ` and the node sum of
//! `P` in `r`. Only `cos 2θ` enters, so symmetric `θ` nodes are folded.

use alloc::vec::Vec;

use super::distribution::SelectivityDistribution;
use super::sigmoid::{tanh_derivatives, tanh_sech2};
use crate::{Error, Result};

pub const MAX_GAMMA_P: usize = 4;
pub const MAX_GAMMA_J: usize = 3;

/// Orders cached by [`GammaTable`]: `p, j ≤ 3`.
pub const TABLE_ORDER: usize = 4;

/// Quadrature nodes for a distribution and a number of `θ` nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadrature {
    /// Folded nodes `(r cos 2θ, weight)`.
    folded: Vec<(f64, f64)>,
    /// All nodes `(r cos 2θ, r sin 2θ, weight)`.
    full: Vec<(f64, f64, f64)>,
}

impl Quadrature {
    pub fn new(dist: &SelectivityDistribution, theta_nodes: usize) -> Self {
        let n = theta_nodes;
        let nf = n as f64;
        let mut folded = Vec::new();
        let mut full = Vec::new();
        for (r, wr) in dist.support() {
            for i in 0..n {
                // θ_i = -π/2 + πi/N, so 2θ_i = -π + 2πi/N.
                let (s, c) = libm::sincos(-core::f64::consts::PI + 2.0 * core::f64::consts::PI * i as f64 / nf);
                full.push((r * c, r * s, wr / nf));
            }
            for i in 0..=n / 2 {
                let mult = if i == 0 || (n % 2 == 0 && i == n / 2) { 1.0 } else { 2.0 };
                let c = -libm::cos(2.0 * core::f64::consts::PI * i as f64 / nf);
                folded.push((r * c, wr * mult / nf));
            }
        }
        Self { folded, full }
    }

    pub fn folded(&self) -> &[(f64, f64)] {
        &self.folded
    }

    pub fn full(&self) -> &[(f64, f64, f64)] {
        &self.full
    }

    /// A single `Γ_p^j(v0, ρ)`.
    pub fn gamma(&self, mu: f64, p: usize, j: usize, v0: f64, rho: f64) -> Result<f64> {
        if p > MAX_GAMMA_P {
            return Err(Error::Order { what: "Gamma derivative index p", value: p, max: MAX_GAMMA_P });
        }
        if j > MAX_GAMMA_J {
            return Err(Error::Order { what: "Gamma moment index j", value: j, max: MAX_GAMMA_J });
        }
        if !(rho >= 0.0) {
            return Err(Error::Domain { what: "rho", value: rho });
        }
        let mut acc = 0.0;
        for &(a, w) in &self.folded {
            let d = tanh_derivatives(mu, v0 + rho * a);
            acc += w * libm::pow(a, j as f64) * d[p];
        }
        Ok(acc)
    }

    /// `(Γ_0^0, Γ_1^1)`: the value and `ρ`-derivative used by the root finder.
    #[inline]
    pub fn g00_g11(&self, mu: f64, v0: f64, rho: f64) -> (f64, f64) {
        let (mut g00, mut g11) = (0.0, 0.0);
        for &(a, w) in &self.folded {
            let (t, s) = tanh_sech2(mu * (v0 + rho * a));
            g00 += w * t;
            g11 += w * a * s;
        }
        (g00, mu * g11)
    }

    /// All `Γ_p^j` with `p, j ≤ 3` at one point.
    pub fn table(&self, mu: f64, v0: f64, rho: f64) -> GammaTable {
        let mut g = [[0.0; TABLE_ORDER]; TABLE_ORDER];
        for &(a, w) in &self.folded {
            let d = tanh_derivatives(mu, v0 + rho * a);
            let pw = [w, w * a, w * a * a, w * a * a * a];
            for (row, dp) in g.iter_mut().zip(&d) {
                for (cell, x) in row.iter_mut().zip(&pw) {
                    *cell += x * dp;
                }
            }
        }
        GammaTable { v0, rho, g }
    }
}

/// `Γ_p^j(v0, ρ)` for `p, j ≤ 3`; `g[p][j]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaTable {
    pub v0: f64,
    pub rho: f64,
    pub g: [[f64; TABLE_ORDER]; TABLE_ORDER],
}

impl GammaTable {
    #[inline]
    pub fn get(&self, p: usize, j: usize) -> f64 {
        self.g[p][j]
    }
}
