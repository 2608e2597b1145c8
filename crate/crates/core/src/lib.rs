//! Finite-dimensional quantum evolution on a discrete phase-space grid,
//! with transition amplitudes computed as exhaustive sums over paths.

pub mod error;
pub mod evolution;
pub mod experiments;
pub mod linalg;
pub mod pathsum;
pub mod quantization;

pub use error::{Error, Result};
pub use linalg::{Hermitian, Operator, StateVector, Unitary, C64};
