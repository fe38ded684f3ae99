use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// a(N) = a0 + a1 N left the parabolic regime.
    #[error("diffusion a(N) = {value} is not positive at firing rate N = {n_rate}")]
    NonPositiveDiffusion { n_rate: f64, value: f64 },

    #[error("firing-rate closure broke down: 1 - a1 p/h = {denominator} <= 0 (p = {p_last})")]
    FiringRateClosure { p_last: f64, denominator: f64 },

    #[error(
        "technical assumption |g| <= 2/h violated at interface {interface}: g = {g}, 2/h = {bound}"
    )]
    TechnicalAssumption {
        interface: usize,
        g: f64,
        bound: f64,
    },

    #[error("negative density {value} at node {node} (t = {t})")]
    NegativeDensity { node: usize, value: f64, t: f64 },

    #[error("non-finite value at node {node} (t = {t})")]
    NonFinite { node: usize, t: f64 },

    #[error("singular tridiagonal system at row {row}")]
    SingularSystem { row: usize },

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("configuration error: {}", .0.join("; "))]
    Config(Vec<String>),

    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
