use thiserror::Error;

/// Failures raised while sampling worlds, captions and instances.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenError {
    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("truncated normal(mu={mu}, sigma={sigma}) found no draw in [{lo}, {hi}] after {attempts} tries")]
    TruncNormalExhausted {
        mu: f64,
        sigma: f64,
        lo: f64,
        hi: f64,
        attempts: usize,
    },

    #[error("could not place a {what} after {attempts} attempts")]
    PlacementFailure { what: String, attempts: usize },

    #[error("world generation failed after {attempts} attempts: {last}")]
    WorldGenerationFailed { attempts: usize, last: String },

    #[error("no agreeing caption found for the world after {attempts} attempts")]
    UnsatisfiableCaption { attempts: usize },

    #[error("no world falsifying `{caption}` found after {attempts} attempts")]
    FalseWorldExhausted { caption: String, attempts: usize },

    #[error("strategy {strategy} produced no false variant after {attempts} attempts")]
    NoFalseVariant { strategy: String, attempts: usize },

    #[error("strategy {strategy} does not apply to this caption")]
    InapplicableStrategy { strategy: String },

    #[error("unknown dataset `{0}`")]
    UnknownDataset(String),

    #[error("unknown partition tag `{tag}` for dataset `{dataset}`")]
    UnknownPartition { dataset: String, tag: String },

    #[error("partition `{tag}` produced no instance after {attempts} draws")]
    PartitionStarved { tag: String, attempts: usize },

    #[error("mixer components disagree on image size ({0} vs {1})")]
    IncompatibleImageSize(u32, u32),

    #[error("{split} instance {index}: {source}")]
    Instance {
        split: String,
        index: u64,
        #[source]
        source: Box<GenError>,
    },

    #[error("instance invariant violated: caption `{caption}` evaluates to {actual} but label is {label}")]
    LabelMismatch {
        caption: String,
        label: bool,
        actual: bool,
    },
}

pub type Result<T, E = GenError> = std::result::Result<T, E>;
