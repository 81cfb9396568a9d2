//! Numerical laboratory for the 1D compressible Euler equations with the
//! singular hard-sphere pressure `p(rho) = eps (rho/(1-rho))^gamma`.

pub mod entropy;
pub mod eos;
pub mod error;
pub mod grid;
pub mod limits;
pub mod psystem;
pub mod quadrature;
pub mod riemann;
pub mod trajectory;
pub mod viscous;

pub use eos::PressureParams;
pub use error::{Error, Result};
pub use grid::Grid;
pub use riemann::{EulerianState, LagrangianState, RegionBound};
pub use trajectory::{Snapshot, Trajectory};
