use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("quadrature does not settle under refinement: {0}")]
    NonIntegrable(String),
    #[error("collar depth {s0} must stay below half the domain thickness {half}")]
    CollarTooDeep { s0: f64, half: f64 },
    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),
    #[error("negative jump rate between nodes {0} and {1}")]
    NegativeRate(usize, usize),
    #[error("normal derivative of h is {found} on the sticky boundary, expected 1")]
    NormalDerivativeMismatch { found: f64 },
    #[error("non-finite quantity: {0}")]
    NonFinite(String),
    #[error("missing constants: {0}")]
    MissingConstants(&'static str),
    #[error("tabulated phi does not reach level {0}")]
    PhiNotDecaying(f64),
    #[error("tabulated xi does not decay far enough")]
    XiNotDecaying,
    #[error("rate function has no ultraboundedness integral: {0}")]
    NotUltra(String),
    #[error("rate function family cannot be classified")]
    Unclassified,
    #[error("form graph is disconnected (spectral gap is zero)")]
    Disconnected,
    #[error("optimizer failed: {0}")]
    NonConvergent(String),
    #[error("fit needs at least 5 samples spanning two decades")]
    InsufficientSpan,
    #[error("absorbing state {0}")]
    AbsorbingState(usize),
    #[error("invalid rate function: {0}")]
    InvalidRate(String),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
