use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("not a generator: column {column} sums to {sum:e} (column 1-norm {norm:e})")]
    NotAGenerator { column: usize, sum: f64, norm: f64 },

    #[error("not a generator: off-diagonal entry ({row}, {column}) = {value:e} has the diagonal's sign")]
    OffDiagonalSign { row: usize, column: usize, value: f64 },

    #[error("ambiguous sign convention: diagonal entries have mixed signs")]
    AmbiguousConvention,

    #[error("reducible chain: state {state} is not strongly connected to state 0")]
    ReducibleChain { state: usize },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("prepare failed: diagonal block {block} is singular")]
    PrepareFailed { block: usize },

    #[error("matrix of order {n} exceeds the dense limit {limit}")]
    DenseLimit { n: usize, limit: usize },

    #[error("iteration diverged at step {iteration}")]
    Diverged { iteration: usize },

    #[error("numeric failure: {0}")]
    NumericFailure(String),

    #[error("no eigenvalue within 1e-6 of 1 (closest at distance {distance:e})")]
    NotAStochasticSplitting { distance: f64 },
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidArgument(message.into())
    }
}
