//! Simulation of position-based quantum cryptography.
//!
//! The crate executes position-verification, authentication and key-exchange
//! protocols inside a timed message model, runs the attacks against them
//! (including instantaneous nonlocal quantum computation) and checks the
//! entropic bounds that can be evaluated numerically.
//!
//! Numeric layers are generic over [`Scalar`] (`f32` or `f64`); protocol
//! layers use `f64`. Concrete aliases for the common case live at the root.

pub mod adversary;
pub mod auth;
pub mod entropy;
pub mod error;
pub mod linalg;
pub mod montecarlo;
pub mod protocols;
pub mod qsim;
pub mod scalar;
pub mod spacetime;
pub mod teleport;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Matrix64 = linalg::Matrix<f64>;
pub type Statevector64 = qsim::Statevector<f64>;
pub type Statevector32 = qsim::Statevector<f32>;
pub type DensityMatrix64 = qsim::DensityMatrix<f64>;
pub type RegisterStore64 = qsim::RegisterStore<f64>;
