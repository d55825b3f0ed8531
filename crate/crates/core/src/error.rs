use thiserror::Error;

use crate::povm::ValidationReport;
use crate::robustness::SdpSolution;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max |A - A†| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("measurement operator {index} is not rank-1 (rank {rank})")]
    NotRank1 { index: usize, rank: usize },

    #[error("measurement is not rank-1 projective")]
    NotRank1Projective,

    #[error("pair is not maximally incompatible: {0}")]
    NotMaximalPair(String),

    #[error("invalid POVM: {0}")]
    InvalidPovm(Box<ValidationReport>),

    #[error("invalid stochastic map: {0}")]
    InvalidStochasticMap(String),

    #[error("invalid Kraus channel: Σ K†K deviates from identity by {deviation:e}")]
    InvalidChannel { deviation: f64 },

    #[error("SDP size cap exceeded: {entries} scalar entries (cap {cap})")]
    SizeCapExceeded { entries: usize, cap: usize },

    #[error(
        "SDP solver did not converge after {} iterations (primal residual {:e}, dual residual {:e}, gap {:e})",
        .best.iterations, .best.primal_infeasibility, .best.dual_infeasibility, .best.gap
    )]
    SolverDidNotConverge { best: Box<SdpSolution> },

    #[error("malformed input: {0}")]
    Parse(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
