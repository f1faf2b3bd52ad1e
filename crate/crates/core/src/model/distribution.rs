use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Probability distribution `P(r)` of orientation selectivity, stored as
/// nodes and weights.
#[derive(Debug, Clone, PartialEq)]
pub enum SelectivityDistribution {
    /// All neurons share selectivity `r0` (the ring model).
    Dirac { r0: f64 },
    /// Discrete distribution with nodes `r` and weights `w`.
    Nodes { r: Vec<f64>, w: Vec<f64> },
}

impl SelectivityDistribution {
    pub fn dirac(r0: f64) -> Result<Self> {
        let d = Self::Dirac { r0 };
        d.validate()?;
        Ok(d)
    }

    pub fn nodes(r: Vec<f64>, w: Vec<f64>) -> Result<Self> {
        let d = Self::Nodes { r, w };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Dirac { r0 } => {
                if !(r0.is_finite() && *r0 >= 0.0) {
                    return Err(Error::Parameter { name: "dist.r0", reason: "must be finite and nonnegative" });
                }
            }
            Self::Nodes { r, w } => {
                if r.is_empty() || r.len() != w.len() {
                    return Err(Error::Parameter {
                        name: "dist",
                        reason: "nodes and weights must be nonempty and of equal length",
                    });
                }
                if r.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                    return Err(Error::Parameter { name: "dist.r", reason: "nodes must be finite and nonnegative" });
                }
                if w.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
                    return Err(Error::Parameter { name: "dist.w", reason: "weights must be positive" });
                }
                let total: f64 = w.iter().sum();
                if (total - 1.0).abs() > 1e-12 {
                    return Err(Error::Parameter { name: "dist.w", reason: "weights must sum to 1" });
                }
            }
        }
        Ok(())
    }

    /// `(r_k, w_k)` pairs.
    pub fn support(&self) -> Vec<(f64, f64)> {
        match self {
            Self::Dirac { r0 } => vec![(*r0, 1.0)],
            Self::Nodes { r, w } => r.iter().copied().zip(w.iter().copied()).collect(),
        }
    }

    pub fn r_max(&self) -> f64 {
        self.support().iter().map(|p| p.0).fold(0.0, f64::max)
    }

    /// `∫ g(r) P(r) dr`.
    pub fn expect(&self, g: impl Fn(f64) -> f64) -> f64 {
        self.support().iter().map(|&(r, w)| w * g(r)).sum()
    }
}
