use thiserror::Error;

/// Error type shared across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid timestamp '{0}': expected format yyyy-mm-dd HH:MM:SS")]
    InvalidTimestamp(String),

    #[error("invalid location: {0}")]
    InvalidLocation(String),

    #[error("no grid nodes")]
    NoGridNodes,

    #[error("input not sorted by time at index {0}")]
    UnsortedInput(usize),

    #[error("need at least {need} entries, got {got}")]
    TooFewEntries { need: usize, got: usize },

    #[error("negative energy sum: {0}")]
    NegativeEnergy(f64),

    #[error("diffuse exceeds global: dhi={dhi}, ghi={ghi}")]
    DiffuseExceedsGlobal { dhi: f64, ghi: f64 },

    #[error("non-consecutive horizons: {prev} -> {now}")]
    NonConsecutiveHorizons { prev: u32, now: u32 },

    #[error("missing {field} at {time}")]
    MissingField { field: &'static str, time: String },

    #[error("invalid power curve: {0}")]
    InvalidPowerCurve(String),

    #[error("unknown terrain key '{0}'")]
    UnknownTerrain(String),

    #[error("empty turbine catalog")]
    EmptyCatalog,

    #[error("invalid metadata: {0}")]
    InvalidMeta(String),

    #[error("run start {0} is not at 00:00")]
    RunStartNotMidnight(String),

    #[error("bundle validation failed: {0}")]
    BundleValidation(String),

    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("feature count mismatch: model expects {expected}, got {got}")]
    FeatureCountMismatch { expected: usize, got: usize },

    #[error("invalid model file: {0}")]
    InvalidModelFile(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("insufficient weather coverage: need data through {need}, have through {have}")]
    InsufficientCoverage { need: String, have: String },

    #[error("unknown model '{0}'")]
    UnknownModel(String),

    #[error("empty training window for scenario")]
    EmptyTrainingWindow,

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
