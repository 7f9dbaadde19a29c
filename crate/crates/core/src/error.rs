use thiserror::Error;

/// Errors raised by reducers, estimators and the auxiliary routines.
///
/// Each message starts with the variant name so command-line users can grep
/// for it.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DimError {
    #[error("NonFinite: entry at row {row}, column {col} is not finite")]
    NonFinite { row: usize, col: usize },
    #[error("TooFewRows: need at least 2 observations, got {0}")]
    TooFewRows(usize),
    #[error("EmptyColumns: data matrix has no columns")]
    EmptyColumns,
    #[error("DimensionMismatch: expected {expected} columns, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("DimensionTooLarge: target dimension {d} must satisfy 1 <= d < {limit}")]
    DimensionTooLarge { d: usize, limit: usize },
    #[error("InvalidParameter: {0}")]
    InvalidParameter(String),
    #[error("ZeroVariance: column {0} has zero variance")]
    ZeroVariance(usize),
    #[error("RankDeficient: covariance is numerically singular (min/max eigenvalue ratio {0:e})")]
    RankDeficient(f64),
    #[error("KTooLarge: k = {k} must be at most n - 1 = {max}")]
    KTooLarge { k: usize, max: usize },
    #[error("NonPositiveRadius: eps must be positive, got {0}")]
    NonPositiveRadius(f64),
    #[error("NegativeWeight: edge ({0}, {1}) has negative weight {2}")]
    NegativeWeight(usize, usize, f64),
    #[error("NegativeEntries: kernel requires nonnegative data, found {value} at row {row}, column {col}")]
    NegativeEntries { row: usize, col: usize, value: f64 },
    #[error("ZeroVector: row {0} is all zeros, cosine kernel undefined")]
    ZeroVector(usize),
    #[error("UnknownModel: '{0}'")]
    UnknownModel(String),
    #[error("UnknownMethod: '{0}'")]
    UnknownMethod(String),
    #[error("BadSampleCount: model '{model}' needs at least {min} samples, got {n}")]
    BadSampleCount { model: String, n: usize, min: usize },
    #[error("InsufficientPositiveEigenvalues: requested {requested}, only {available} positive")]
    InsufficientPositiveEigenvalues { requested: usize, available: usize },
    #[error("TooManyDims: target dimension {d} exceeds number of classes minus one ({max})")]
    TooManyDims { d: usize, max: usize },
    #[error("SingularWithinScatter: within-class scatter is singular after regularization")]
    SingularWithinScatter,
    #[error("DisconnectedGraph: neighbor graph has {} components (sizes {sizes:?}); increase k or eps", sizes.len())]
    DisconnectedGraph { sizes: Vec<usize> },
    #[error("SingularLocalGram: local Gram matrix of point {0} is singular after regularization")]
    SingularLocalGram(usize),
    #[error("DegenerateVariance: Fisher score of feature {0} is undefined (no spread at all)")]
    DegenerateVariance(usize),
    #[error("ZeroWeightedVariance: feature {0} has zero degree-weighted variance")]
    ZeroWeightedVariance(usize),
    #[error("TooFewPoints: need more than {needed} points, got {n}")]
    TooFewPoints { n: usize, needed: usize },
    #[error("DuplicatePoints: point {0} does not have enough distinct neighbors")]
    DuplicatePoints(usize),
    #[error("DegenerateDistances: {0}")]
    DegenerateDistances(String),
    #[error("ZeroTotalVariance: data has zero total variance")]
    ZeroTotalVariance,
    #[error("AllRatiosOne: every second-to-first neighbor distance ratio equals 1")]
    AllRatiosOne,
    #[error("SingularMatrix: {0}")]
    SingularMatrix(String),
    #[error("OutOfMemoryGuard: estimated working set {estimated} bytes exceeds cap {cap} bytes")]
    OutOfMemoryGuard { estimated: u64, cap: u64 },
}

pub type Result<T> = std::result::Result<T, DimError>;
