use thiserror::Error;

/// Errors raised by the distribution routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DistError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("noncentrality {0} exceeds the supported cap of 1e6")]
    NcpTooLarge(f64),
    #[error("series did not converge within {0} terms")]
    NonConvergence(usize),
    #[error("target probability {target} has no nonnegative ncp solution (central value {central})")]
    OutOfRange { target: f64, central: f64 },
}

/// Errors raised by the regression and scoring machinery.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("design matrix is rank deficient (reciprocal condition {rcond:e})")]
    RankDeficient { rcond: f64 },
    #[error("need at least 3 residual degrees of freedom, got n - p = {0}")]
    TooFewRows(i64),
    #[error("at most 64 columns are supported, got {0}")]
    TooManyColumns(usize),
    #[error("submodel {key:#x} is numerically singular (reciprocal condition {rcond:e})")]
    SingularSubmodel { key: u64, rcond: f64 },
    #[error("{free} free columns give 2^{free} subsets, above the limit of 2^{limit}")]
    TooManySubsets { free: usize, limit: usize },
    #[error("subset does not contain forced column {0}")]
    ForcedColumnMissing(usize),
    #[error("covariance matrix is not diagonal (entry ({0}, {1}))")]
    NotDiagonal(usize, usize),
    #[error("exact confidence distributions are only available for the equal-weights ensemble")]
    UnsupportedEnsemble,
    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Dist(#[from] DistError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
