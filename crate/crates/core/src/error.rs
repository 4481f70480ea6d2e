use thiserror::Error;

/// Errors shared by the measure, class, predictor and analysis layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{name} = {value} is outside (0, 1]")]
    OutOfUnitInterval { name: &'static str, value: f64 },

    #[error("p = {0} is outside [0, 1]")]
    InvalidProbability(f64),

    #[error("reference probability q = {0} must lie strictly inside (0, 1)")]
    DegenerateReference(f64),

    #[error("vectors have different lengths: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("vectors must be non-empty")]
    EmptyInput,

    #[error("parameter {name} = {value} is not a rational in [0, 1]")]
    ParameterRange { name: &'static str, value: String },

    #[error("alpha = {alpha} must be a dyadic rational in (0, 1] with at most {precision_bits} fractional bits")]
    InvalidAlpha { alpha: String, precision_bits: u32 },

    #[error("string of length {depth} exceeds the interval precision horizon of {precision_bits} bits")]
    DepthExceedsPrecision { depth: usize, precision_bits: u32 },

    #[error("operation requires a measure family, got a semimeasure spec")]
    NotAMeasure,

    #[error("context \"{context}\" has probability zero")]
    ZeroContext { context: String },

    #[error("entry {entry} assigns probability zero to \"{string}\"")]
    ZeroProbability { entry: usize, string: String },

    #[error("mixture mass of \"{string}\" is zero: a priori complexity is infinite")]
    InfiniteComplexity { string: String },

    #[error("entry id {id} out of range for a class of {len} entries")]
    EntryOutOfRange { id: usize, len: usize },

    #[error("class violates the Kraft inequality: sum of 2^-L is {sum} > 1")]
    KraftViolation { sum: String },

    #[error("class must contain at least one entry")]
    EmptyClass,

    #[error("class file {path}: {source}")]
    ClassParse {
        path: String,
        #[source]
        source: serde_json::Error,
    },

    #[error("class file entry {index}: {reason}")]
    ClassEntry { index: usize, reason: String },

    #[error("selector factor gamma = {0} must be > 1")]
    InvalidGamma(f64),

    #[error("no entry assigns positive probability to \"{string}\"")]
    NoExplanation { string: String },

    #[error("class has no averaged entry for the pair ({p}, {q}); build it with pairwise averages")]
    MissingPairAverage { p: usize, q: usize },

    #[error("depth {depth} exceeds the configured maximum {max}")]
    DepthLimit { depth: u32, max: u32 },

    #[error("deficiency D = {d} below the admissible minimum {min}")]
    DeficiencyRange { d: f64, min: f64 },

    #[error("bound chain link {link} failed: {detail}")]
    ChainLink { link: &'static str, detail: String },

    #[error("{op} failed at step {step}: {source}")]
    AtStep {
        op: &'static str,
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
