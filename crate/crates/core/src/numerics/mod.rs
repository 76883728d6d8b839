// SPDX-License-Identifier: Apache-2.0

//! Special functions, quadrature and ODE integration shared by every other module.

mod matrix;
mod ode;
mod quadrature;
mod special;

pub use matrix::{pauli_components, ComplexMatrix};
pub use ode::{integrate_ode, integrate_ode_grid, norm, OdeMethod, OdeSpec};
pub use quadrature::{
    integrate, integrate_panels, GaussRule, PanelGrid, QuadratureMethod, QuadratureSpec,
};
pub use special::bessel_j;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error("domain error: {0}")]
    Domain(&'static str),
    #[error("invalid numeric spec: {0}")]
    InvalidSpec(&'static str),
    #[error("quadrature exceeded its subdivision limit (partial estimate {estimate})")]
    SubdivisionLimit { estimate: f64 },
    #[error("ODE step size underflow at t = {0}")]
    StepUnderflow(f64),
    #[error("norm drift {drift:e} exceeds tolerance at t = {time}")]
    NormDrift { drift: f64, time: f64 },
    #[error("initial state is not normalized (norm {0})")]
    NotNormalized(f64),
    #[error("Hamiltonian is not Hermitian at t = {0}")]
    NotHermitian(f64),
    #[error("matrix exponential series did not converge")]
    ExpmNotConverged,
}
