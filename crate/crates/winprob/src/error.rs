use thiserror::Error;

/// Errors produced by sample construction, estimation, and evaluation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("observation has no ranked positions")]
    EmptyObservation,
    #[error("algorithm index {index} appears more than once in an observation")]
    DuplicateAlgorithm { index: usize },
    #[error("algorithm index {index} out of range for roster of {m}")]
    IndexOutOfRange { index: usize, m: usize },
    #[error("at least two algorithms are required, got {m}")]
    TooFewAlgorithms { m: usize },
    #[error("sample contains no observations")]
    EmptySample,
    #[error("duplicate algorithm name `{name}`")]
    DuplicateName { name: String },
    #[error("observation index {index} out of range for sample of {n}")]
    ObservationOutOfRange { index: usize, n: usize },

    #[error("probability entries must be nonnegative, got {value} at index {index}")]
    NegativeEntry { index: usize, value: f64 },
    #[error("vector sums to {sum}, expected 1 within {tol}")]
    NotNormalized { sum: f64, tol: f64 },
    #[error("weights must be non-increasing, violated at index {index}")]
    NotMonotone { index: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("weight vector of length {len} exceeds available rank depth {depth}")]
    WeightsExceedDepth { len: usize, depth: usize },
    #[error("leave-one-out needs at least two observations, got {n}")]
    LooNeedsTwo { n: usize },
    #[error("model order {k} infeasible, must lie in 1..={max}")]
    InfeasibleOrder { k: usize, max: usize },

    #[error("infeasible weights: {reason}")]
    InfeasibleWeights { reason: String },

    #[error("{0} requires full rankings over all m algorithms")]
    NeedsFullRankings(&'static str),
    #[error("alphabet of {m}! rankings exceeds the supported maximum m = {max}")]
    AlphabetTooLarge { m: usize, max: usize },
    #[error(
        "algorithms {missing:?} are never observed as a ranked choice; \
         enable regularization or remove them from the roster"
    )]
    DegenerateSupport { missing: Vec<usize> },

    #[error("invalid distribution parameter: {0}")]
    InvalidParams(String),
    #[error("permutation index {index} out of range, m = {m} has {count} permutations")]
    PermutationIndexOutOfRange { index: u64, m: usize, count: u64 },

    #[error("{k} folds invalid for {n} observations")]
    BadFoldCount { k: usize, n: usize },
    #[error("method `{method}` failed: {source}")]
    MethodFailed {
        method: String,
        #[source]
        source: Box<Error>,
    },
    #[error("method `{0}` does not produce a win-probability estimate")]
    NoProbabilityEstimate(String),

    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// Errors from the CSV ingestion layer. Every data error names the offending
/// 1-based line of the input.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("input contains no data rows")]
    Empty,
    #[error("header: {0}")]
    BadHeader(String),
    #[error("line {line}: expected {expected} fields, found {found}")]
    RaggedRow {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: invalid rank `{value}`: {reason}")]
    BadRank {
        line: usize,
        value: String,
        reason: String,
    },
    #[error("line {line}: rank {rank} assigned to more than one algorithm (ties are not supported)")]
    TiedRank { line: usize, rank: usize },
    #[error("line {line}: algorithm `{name}` is not in the roster")]
    UnknownAlgorithm { line: usize, name: String },
    #[error("line {line}: algorithm `{name}` listed more than once")]
    RepeatedAlgorithm { line: usize, name: String },
    #[error("line {line}: empty algorithm name")]
    EmptyName { line: usize },
    #[error("{0}")]
    Roster(String),
}

pub type Result<T> = std::result::Result<T, Error>;
