use thiserror::Error;

/// Errors raised by the graded-space, compactness and problem layers.
///
/// Solver failures carry a trace and live in [`crate::continuation::SolveFailure`].
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("level {level} out of range 0..={max}")]
    LevelRange { level: usize, max: usize },

    #[error("elements belong to different gradings ({left} vs {right})")]
    SpecMismatch { left: String, right: String },

    #[error("invalid grading: {0}")]
    InvalidGrading(String),

    #[error("empty set")]
    EmptySet,

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("bound entry {index} is {value}; entries must be nonnegative")]
    NegativeBound { index: usize, value: f64 },

    #[error("coefficient count {got} does not match 2K+1 = {expected}")]
    CoefficientCount { expected: usize, got: usize },

    #[error("non-finite coefficient at index {0}")]
    NonFinite(usize),

    #[error("extraction exhausted after scanning {scanned} terms: found {found} of {want} indices (inconclusive)")]
    ExtractionExhausted { scanned: usize, found: usize, want: usize },

    #[error("sequence exceeds its declared bound at level {level}: {observed} > {declared}")]
    BoundsViolation { level: usize, observed: f64, declared: f64 },

    #[error("base point outside the domain guard of problem `{problem}`")]
    GuardViolation { problem: String },

    #[error("level {level} needs |v|_{needed}, beyond truncation level {max}")]
    UnavailableLevel { level: usize, needed: usize, max: usize },

    #[error("f(0) != 0 for problem `{problem}`: |f(0)|_{level} = {value}")]
    NonzeroAtOrigin { problem: String, level: usize, value: f64 },

    #[error("tame constant c_{level} = {value} must be positive and finite")]
    NonPositiveConstant { level: usize, value: f64 },

    #[error("sampler failed after {0} retries")]
    SamplerFailure(usize),

    #[error("degenerate sampling: every sampled v vanished")]
    DegenerateSampling,

    #[error("singular linear system (pivot {pivot} at column {column})")]
    Singular { column: usize, pivot: f64 },

    #[error("Newton oracle diverged after {iterations} iterations (residual {residual})")]
    Divergence { iterations: usize, residual: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
