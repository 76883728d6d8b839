// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

use crate::numerics::NumericsError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A configuration value violates an invariant. `field` names the offending input.
    #[error("invalid {field}: {reason}")]
    Invalid { field: String, reason: String },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("pulses {first} and {second} overlap; use the combined-tone reduction or the lab-frame oracle")]
    OverlappingPulses { first: usize, second: usize },
    #[error("drive is off resonance: |ε₀ - Nω|/ε₀ = {mismatch:e} exceeds {tolerance:e}")]
    OffResonance { mismatch: f64, tolerance: f64 },
    #[error("no root of the regularity condition in [{lo}, {hi}]")]
    NoRootInBracket { lo: f64, hi: f64 },
}

impl Error {
    pub fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Invalid {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// True for failures of a numerical method on otherwise valid input.
    pub fn is_numeric(&self) -> bool {
        match self {
            Error::Numerics(NumericsError::InvalidSpec(_)) => false,
            Error::Numerics(_) | Error::NoRootInBracket { .. } => true,
            _ => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
