use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    /// The datum (or the evolved density) has non-negligible mass outside the box.
    #[error("support overflow: {outside:.3e} of the mass lies outside the grid ({context})")]
    SupportOverflow { outside: f64, context: String },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("derivative order {0} exceeds the supported maximum of 6")]
    DerivativeOrder(u32),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("no commuting operator of the form a·t·∂^(m-1) + b·x exists: {0}")]
    NoSolution(String),

    #[error("dyadic window is empty: {0}")]
    Range(String),

    #[error("non-positive value {value:e} at t = {t:e}; cannot take logarithms")]
    NonPositive { t: f64, value: f64 },

    #[error("fit window holds {found} usable samples, at least {required} are needed")]
    InsufficientWindow { found: usize, required: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid series: {0}")]
    InvalidSeries(String),

    #[error("domain too small: half-width {have:.3} < required {need:.3}")]
    DomainTooSmall { have: f64, need: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
