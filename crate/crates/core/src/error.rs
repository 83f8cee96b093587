use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// A boundary value that does not match the initial data.
#[derive(Debug, Clone, PartialEq)]
pub struct EndpointMismatch {
    pub field: &'static str,
    pub x: f64,
    pub initial: f64,
    pub boundary: f64,
}

impl std::fmt::Display for EndpointMismatch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}(x={}) = {} but boundary data gives {}", self.field, self.x, self.initial, self.boundary)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("chi*mu = {product} <= 0 is the finite-time blow-up regime")]
    RejectedRegime { product: f64 },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("non-positive input {value} at node {index}")]
    NonPositiveInput { index: usize, value: f64 },

    #[error("initial data incompatible with boundary data: {}", format_mismatches(.0))]
    IncompatibleData(Vec<EndpointMismatch>),

    #[error("initial density must be positive, found {value} at node {index}")]
    NonPositiveInitialDensity { index: usize, value: f64 },

    #[error("beta signals are required for the parabolic-parabolic variant")]
    MissingBetaSignals,

    #[error("gamma = {gamma} outside the admissible range ({expected})")]
    InvalidGamma { gamma: f64, expected: &'static str },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("({rho}, {s}) outside the domain of {lemma}")]
    DomainError { lemma: &'static str, rho: f64, s: f64 },

    #[error("unstable configuration: dt = {dt} exceeds the allowed step {limit}")]
    StepTooLarge { dt: f64, limit: f64 },

    #[error("config error in {path}: {message}")]
    Config { path: String, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: malformed csv: {message}")]
    Csv { path: PathBuf, message: String },

    #[error("precondition failed: {0}")]
    Precondition(String),

    /// A run inside a study stopped before `t_end`.
    #[error("run failed: {0}")]
    RunFailed(String),
}

fn format_mismatches(list: &[EndpointMismatch]) -> String {
    list.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
