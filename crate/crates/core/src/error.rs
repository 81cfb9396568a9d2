use thiserror::Error;

/// Errors raised by the numerical kernels and experiment harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {what} (got {value})")]
    Domain { what: &'static str, value: f64 },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("quadrature did not reach tolerance {tol:e} (estimate {estimate:e})")]
    Integration { tol: f64, estimate: f64 },

    #[error("density fell below the floor at t = {t}, cell {cell}")]
    NonPositiveDensity { t: f64, cell: usize },

    #[error("density reached the congestion ceiling at t = {t}, cell {cell}")]
    CongestionOverflow { t: f64, cell: usize },

    #[error("vacuum cell {cell} carries nonzero momentum {m}")]
    VacuumMomentum { cell: usize, m: f64 },

    #[error("vacuum encountered at cell {cell} (rho = {rho:e})")]
    Vacuum { cell: usize, rho: f64 },

    #[error("fit requires ≥ 3 points (got {0})")]
    FitTooFewPoints(usize),

    #[error("fit requires positive values (got {0})")]
    FitNonPositive(f64),

    #[error("trajectory has {0} snapshots, at least 3 are required")]
    InsufficientSnapshots(usize),

    #[error("trajectory lacks viscosity metadata")]
    MissingViscosity,

    #[error("window [-{half_width}, {half_width}] x [0, {t}] exceeds the trajectory")]
    WindowExceedsGrid { half_width: f64, t: f64 },

    #[error("resolution guard: {0}")]
    Resolution(String),

    #[error("initial data violate {assumption}: {detail}")]
    Infeasible { assumption: &'static str, detail: String },

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
