//! Sigmoids, selectivity distributions, the `Γ_p^j` family and the plant.

pub mod distribution;
pub mod dynamics;
pub mod gamma;
pub mod input;
pub mod sigmoid;
pub mod transform;

pub use distribution::SelectivityDistribution;
pub use dynamics::{
    f_cartesian, f_cartesian_jet, f_polar, gamma, invariant_radius, ModelParams, PolarState, DEFAULT_THETA_NODES,
};
pub use gamma::{GammaTable, Quadrature};
pub use input::{CircularInput, ConstantInput, InputBounds, InputJet, InputSignal, Transformed};
pub use sigmoid::{sigma_eval, SigmoidSpec, SigmoidTransform};
pub use transform::{appendix_transform, reduce_sigmoid, OutputMap, Reduced, TransformKind};
