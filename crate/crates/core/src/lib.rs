//! Reduced neural-field model of the primary visual cortex and a hybrid
//! high-gain observer that reconstructs its three-dimensional state from the
//! averaged activity `y = v0`.
//!
//! The crate is `no_std` (with `alloc`). Everything here is a pure function of
//! immutable parameter objects except [`observer::HybridObserver`], which owns
//! its own stepping state.
//!
//! Module map:
//!
//! * [`model`]: sigmoid, selectivity distribution, the `Γ_p^j` quadrature
//!   family and the plant vector field in Cartesian and polar coordinates.
//! * [`observability`]: the output derivatives `S_t`, `T_t`, the fourth
//!   derivative `L⁴h` and input excitation diagnostics.
//! * [`inverse`]: the Lipschitz pseudo-inverse of `T_t`.
//! * [`observer`]: the gain matrix and the hybrid observer.
//! * [`sim`]: fixed-step RK4 co-simulation of plant and observer.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

mod error;
pub mod inverse;
pub mod linalg;
pub mod model;
pub mod observability;
pub mod observer;
pub mod sim;

pub use error::{Error, Result};
pub use linalg::{Vec2, Vec3, Vec4};
