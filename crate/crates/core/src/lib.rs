// SPDX-License-Identifier: Apache-2.0

//! Time evolution, populations and quasienergies of one and two qubits driven
//! by trains of Gaussian pulses.
//!
//! All energies and frequencies are in units of the bare splitting `ε₀`, all
//! times in units of `1/ε₀`.

pub mod numerics;
pub mod pulses;

mod error;
pub use error::{Error, Result};
pub mod propagator;
pub mod resonance;
pub mod floquet;
pub mod multiqubit;
