use thiserror::Error;

use crate::estimation::Boundary;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dispersal parameter must be positive and finite, got {0}")]
    InvalidPsi(f64),

    #[error("relative psi needs a sample size of at least 1")]
    UnresolvedRelativePsi,

    #[error("abundance entries must be positive, got frequency {frequency} with count {count}")]
    InvalidAbundance { frequency: u64, count: u64 },

    #[error("probability of an empty partition is undefined")]
    EmptyPartition,

    #[error("empty sample")]
    EmptySample,

    #[error("partition enumeration of n = {n} exceeds the cap of {cap}")]
    EnumerationCap { n: u64, cap: u64 },

    #[error("need at least {required} observations, got {n}")]
    TooFewObservations { n: u64, required: u64 },

    #[error("{boundary} (K = {k}, n = {n})")]
    Boundary { boundary: Boundary, k: u64, n: u64 },

    #[error("sample {index}: {source}")]
    InSample {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("cannot estimate psi for shape test: {0}")]
    ShapeTest(Box<Error>),

    #[error("need at least {required} samples, got {got}")]
    TooFewSamples { got: usize, required: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("bootstrap retry cap exhausted: {degenerate} degenerate resamples across {rounds} rounds")]
    BootstrapExhausted { degenerate: u64, rounds: usize },

    #[error("{points} data points but {labels} labels")]
    LengthMismatch { points: usize, labels: usize },

    #[error("need at least 2 distinct class labels, got {0}")]
    TooFewClasses(usize),

    #[error("class {class:?}, feature {feature}: {source}")]
    Slice {
        class: String,
        feature: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("expected {expected} features, row {row} has {found}")]
    FeatureCount {
        expected: usize,
        found: usize,
        row: usize,
    },

    #[error("model document: {0}")]
    Model(String),
}
