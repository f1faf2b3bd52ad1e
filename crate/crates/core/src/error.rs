use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A derivative order or `Γ_p^j` index outside the supported range.
    Order { what: &'static str, value: usize, max: usize },
    /// A model or observer parameter violates its invariant.
    Parameter { name: &'static str, reason: &'static str },
    /// An argument lies outside the domain of the function.
    Domain { what: &'static str, value: f64 },
    /// The 2x2 system `[I12; dI12] zeta = (s, ds)` is too close to singular.
    SingularSystem { wedge: f64, threshold: f64 },
    /// `Γ_1^1` vanished numerically, so the radial velocity cannot be recovered.
    Singularity { v0: f64, rho: f64 },
    /// An iterative method did not reach its tolerance.
    NoConvergence { what: &'static str, iterations: usize },
    /// A non-finite value appeared during integration.
    NonFinite { what: &'static str, t: f64 },
    /// The hybrid observer switched more often than the passage estimate allows.
    TooManySwitches { t: f64, count: usize },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Order { what, value, max } => {
                write!(f, "{what} = {value} is out of range (max {max})")
            }
            Error::Parameter { name, reason } => write!(f, "invalid parameter `{name}`: {reason}"),
            Error::Domain { what, value } => write!(f, "{what} = {value} is outside the domain"),
            Error::SingularSystem { wedge, threshold } => write!(
                f,
                "input excitation too weak: |I12 ^ dI12| = {wedge:e} < {threshold:e}"
            ),
            Error::Singularity { v0, rho } => {
                write!(f, "Gamma_1^1 vanishes at v0 = {v0}, rho = {rho}")
            }
            Error::NoConvergence { what, iterations } => {
                write!(f, "{what} did not converge in {iterations} iterations")
            }
            Error::NonFinite { what, t } => write!(f, "non-finite {what} at t = {t}"),
            Error::TooManySwitches { t, count } => write!(
                f,
                "observer switched {count} times by t = {t}; at most two are expected"
            ),
        }
    }
}

impl core::error::Error for Error {}
