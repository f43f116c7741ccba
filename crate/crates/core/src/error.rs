use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoreError {
    #[error("sample {index} has {found} features, expected {expected}")]
    DimensionMismatch {
        index: usize,
        expected: usize,
        found: usize,
    },

    #[error("sample {index} contains a non-finite value")]
    NonFinite { index: usize },

    #[error("partials have different dimensions ({left} vs {right})")]
    PartialDimension { left: usize, right: usize },

    #[error("coefficient vector has {found} entries, expected {expected}")]
    CoefficientDimension { expected: usize, found: usize },

    #[error("no samples were accumulated")]
    EmptyPartial,

    #[error("normal equations are singular (dimension {dim}, lambda {lambda:e})")]
    Singular { dim: usize, lambda: f64 },

    #[error("{predictions} predictions vs {observations} observations")]
    LengthMismatch {
        predictions: usize,
        observations: usize,
    },

    #[error("empty input")]
    Empty,

    #[error("non-finite value at position {0}")]
    NonFiniteValue(usize),

    #[error("split ratio {0} is outside (0, 1)")]
    InvalidRatio(f64),

    #[error("degenerate split of {n} records at ratio {ratio}: {train} train / {test} test")]
    DegenerateSplit {
        n: usize,
        ratio: f64,
        train: usize,
        test: usize,
    },

    #[error("cannot cut {rows} rows into {parts} partitions")]
    TooFewRows { rows: usize, parts: usize },

    #[error("feature column {column} is constant")]
    ConstantColumn { column: usize },

    #[error("baseline must be positive, got {0}")]
    NonPositiveBaseline(f64),

    #[error("invalid training configuration: {0}")]
    InvalidConfig(&'static str),
}
