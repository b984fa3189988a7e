use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch in {op}: expected {expected}, got {actual}")]
    DimensionMismatch {
        op: &'static str,
        expected: String,
        actual: String,
    },

    #[error("rank deficient: rank {rank} < {required} required streams")]
    RankDeficient { rank: usize, required: usize },

    #[error("noise covariance is singular")]
    SingularNoiseCovariance,

    #[error("duplicate quantized angle pair (m={m}, n={n})")]
    DuplicatePair { m: usize, n: usize },

    #[error("exhaustive grid of {levels}^{dims} points exceeds the limit of {limit}")]
    GridTooLarge { levels: usize, dims: usize, limit: u64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn mismatch(op: &'static str, expected: impl ToString, actual: impl ToString) -> Self {
        Error::DimensionMismatch {
            op,
            expected: expected.to_string(),
            actual: actual.to_string(),
        }
    }
}
