//! Reductions of related model variants to the odd-sigmoid voltage model.
//!
//! * `Threshold { h0 }`: rate `σ(v0 + h0)` in the mean equation. With the
//!   working potential `w0 = v0 + h0` the model becomes the odd one with
//!   `I0 ← I0 + h0`.
//! * `PositiveSigmoid { s1, s2 }`: rate `s1 σ + s2`. The constant part only
//!   survives in the mean, giving `J_i ← s1 J_i` and `I0 ← I0 + J0 s2`.
//! * `ActivityToVoltage`: activity model `τ ȧ = -a + M⁻¹Ψ(M a + I)` with
//!   `M = diag(J0, J1 m2/2, J1 m2/2)`. The voltage `v = M a + I` obeys the
//!   voltage model with input `I + τ İ`.

use super::dynamics::ModelParams;
use super::input::{InputSignal, Transformed};
use super::sigmoid::SigmoidTransform;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TransformKind {
    Threshold { h0: f64 },
    PositiveSigmoid { s1: f64, s2: f64 },
    ActivityToVoltage,
}

/// How the mean component of the original model is read off the reduced one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OutputMap {
    Identity,
    /// `original v0 = reduced v0 + shift`.
    Shift { shift: f64 },
    /// `reduced v0 = J0 a0 + I0(t)`, `I0` being the original input.
    ActivityMean { j0: f64 },
}

impl OutputMap {
    /// Compose `self` after `inner` when only shifts are involved.
    fn then(self, other: OutputMap) -> OutputMap {
        match (self, other) {
            (OutputMap::Identity, o) | (o, OutputMap::Identity) => o,
            (OutputMap::Shift { shift: a }, OutputMap::Shift { shift: b }) => OutputMap::Shift { shift: a + b },
            (_, o) => o,
        }
    }
}

/// A reduced model together with its effective input.
#[derive(Debug, Clone)]
pub struct Reduced<S> {
    pub params: ModelParams,
    pub input: Transformed<S>,
    pub output: OutputMap,
}

pub fn appendix_transform<S: InputSignal>(
    kind: TransformKind,
    params: &ModelParams,
    input: S,
) -> Result<Reduced<S>> {
    let mut p = params.clone();
    let tau = p.tau;
    let (offset0, lead, output) = match kind {
        TransformKind::Threshold { h0 } => {
            let shift = if h0 == 0.0 { OutputMap::Identity } else { OutputMap::Shift { shift: -h0 } };
            (h0, 0.0, shift)
        }
        TransformKind::PositiveSigmoid { s1, s2 } => {
            if !(s1 > 0.0 && s1.is_finite()) {
                return Err(Error::Parameter { name: "sigmoid.s1", reason: "must be positive" });
            }
            let offset = params.j0 * s2;
            p.j0 *= s1;
            p.j1 *= s1;
            (offset, 0.0, OutputMap::Identity)
        }
        TransformKind::ActivityToVoltage => (0.0, tau, OutputMap::ActivityMean { j0: params.j0 }),
    };
    Ok(Reduced { params: p, input: Transformed::new(input, [offset0, 0.0, 0.0], lead), output })
}

/// Apply the sigmoid reshaping recorded in `params.sigmoid().transform`:
/// positive-sigmoid scaling first, then the threshold shift.
pub fn reduce_sigmoid<S: InputSignal>(params: &ModelParams, input: S) -> Result<Reduced<S>> {
    let t = params.sigmoid().transform;
    let stripped = params.with_sigmoid(params.sigmoid().with_transform(SigmoidTransform::default()));
    let pos = appendix_transform(TransformKind::PositiveSigmoid { s1: t.s1, s2: t.s2 }, &stripped, input)?;
    let offset = pos.input.offset[0] + t.h0;
    let output = pos.output.then(if t.h0 == 0.0 { OutputMap::Identity } else { OutputMap::Shift { shift: -t.h0 } });
    Ok(Reduced { params: pos.params, input: Transformed::new(pos.input.inner, [offset, 0.0, 0.0], 0.0), output })
}
