use std::fmt;

use thiserror::Error;

/// One rejected (or finally accepted) trial of the phase search.
#[derive(Debug, Clone, PartialEq)]
pub struct Probe {
    pub k: u32,
    pub distance: f64,
    pub threshold: f64,
}

impl fmt::Display for Probe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "k={} dist={:e} B={:e}", self.k, self.distance, self.threshold)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A step scale that is undefined at the current state, e.g. `sqrt(S)` with `S = 0`.
    #[error("undefined step scale: {0}")]
    UndefinedScale(String),

    /// The phase search exceeded its doubling cap. Never expected on valid inputs.
    #[error("phase search diverged at t={t}: no admissible k in [{k_start}, {k_cap}] (last probe: {})",
        probes.last().map(ToString::to_string).unwrap_or_default())]
    Divergence {
        t: usize,
        k_start: u32,
        k_cap: u32,
        probes: Vec<Probe>,
    },

    #[error("non-finite value produced at t={t}: {what}")]
    NonFinite { t: usize, what: &'static str },

    /// A provable inequality failed to hold, which signals an arithmetic bug.
    #[error("property `{name}` violated: lhs={lhs:e} > rhs={rhs:e}")]
    PropertyFailure { name: &'static str, lhs: f64, rhs: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
