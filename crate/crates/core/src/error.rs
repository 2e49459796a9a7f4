use alloc::string::String;
use alloc::vec::Vec;

/// Errors raised by the fitting, sampling and inference routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("non-finite value in {what}")]
    NonFinite { what: &'static str },
    #[error("need at least 2 observations, got {n}")]
    TooFewObservations { n: usize },
    #[error("every column of the design is constant")]
    AllColumnsConstant,
    #[error("no descent direction: residual is orthogonal to every candidate column")]
    NoDescentDirection,
    #[error("degenerate selection: column {column} is numerically in the span of the selected columns")]
    DegenerateSelection { column: usize },
    #[error("rank-deficient restricted design; dependent columns: {columns:?}")]
    RankDeficient { columns: Vec<usize> },
    #[error("support of size {support} is too large for {n} observations")]
    SupportTooLarge { support: usize, n: usize },
    #[error("column index {index} out of range for {p} columns")]
    ColumnOutOfRange { index: usize, p: usize },
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("first-stage calibration infeasible: sigma_v^2 = {sigma_v2}")]
    CalibrationInfeasible { sigma_v2: f64 },
    #[error("weak or empty first stage (support size {support_size})")]
    WeakFirstStage { support_size: usize },
    #[error("selected control union of size {union} leaves no degrees of freedom with n = {n}")]
    UnionTooLarge { union: usize, n: usize },
    #[error("all {replications} replications failed")]
    AllReplicationsFailed { replications: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = core::result::Result<T, Error>;
