use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("channel matrix is empty")]
    EmptyMatrix,
    #[error("channel matrix is not rectangular: row {row} has {found} entries, expected {expected}")]
    NotRectangular {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("row {row} of the channel sums to {sum}, not 1")]
    RowNotStochastic { row: usize, sum: f64 },
    #[error("entry ({row}, {col}) is {value}; probabilities must lie in [0, 1]")]
    NegativeEntry { row: usize, col: usize, value: f64 },
    #[error("degenerate alphabet: {inputs} inputs and {outputs} outputs (need at least 2 of each)")]
    DegenerateAlphabet { inputs: usize, outputs: usize },
    #[error("label count {found} does not match alphabet size {expected}")]
    LabelMismatch { expected: usize, found: usize },

    #[error("distribution does not sum to 1 (sum = {sum})")]
    NotNormalized { sum: f64 },
    #[error("distribution entry {index} is {value}; probabilities must lie in [0, 1]")]
    InvalidProbability { index: usize, value: f64 },
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("empty word")]
    EmptyWord,
    #[error("symbol {symbol} at position {position} is outside the alphabet of size {alphabet_size}")]
    SymbolOutOfRange {
        position: usize,
        symbol: usize,
        alphabet_size: usize,
    },
    #[error("type counts sum to {sum}, expected block length {n}")]
    CountMismatch { sum: u64, n: u64 },
    #[error("block length must be positive")]
    ZeroBlockLength,

    #[error("rho must be in (0,1], got {0}")]
    InvalidRho(f64),
    #[error("s must satisfy s > 0 and s*rho < 1, got s = {s}, rho = {rho}")]
    InvalidS { s: f64, rho: f64 },
    #[error("input distribution has zero mass at symbol {index}; a strictly positive distribution is required")]
    NonPositiveInput { index: usize },
    #[error("starting distribution has zero mass at symbol {index}; zeros are absorbing under the multiplicative update, so the iteration could never reach the optimum")]
    NonPositiveStart { index: usize },
    #[error("update collapsed all probability mass")]
    AllZeroUpdate,
    #[error("tolerance must be positive and finite, got {0}")]
    InvalidTolerance(f64),

    #[error("divergence is infinite")]
    InfiniteDivergence,
    #[error("{count} types exceed the enumeration limit of {limit}")]
    TooManyTypes { count: f64, limit: u64 },
    #[error("grid search supports at most {limit} input symbols, got {found}")]
    AlphabetTooLarge { found: usize, limit: usize },
    #[error("grid step must lie in (0, 1], got {0}")]
    InvalidStep(f64),
    #[error("exhaustive output enumeration needs {count} sequences, above the limit of {limit}")]
    OutputSpaceTooLarge { count: f64, limit: u64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
