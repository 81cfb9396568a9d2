//! Singular-limit experiments: initial data, sweeps and limit diagnostics.

pub mod fit;
pub mod profile;
pub mod diagnostics;
pub mod transform;
pub mod sweep;
