use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("invalid schema: {0}")]
    InvalidSchema(String),
    #[error("sample {sample}: {reason}")]
    InvalidSample { sample: usize, reason: String },
    #[error("dataset has no samples")]
    EmptyDataset,
    #[error("the empty coalition cannot be masked; route it to the majority classifier")]
    EmptyCoalition,
    #[error("invalid permutation plan: {0}")]
    InvalidPlan(String),
    #[error("sample {sample} has no valid donor for {mode} permutation")]
    NoValidDonor { sample: usize, mode: &'static str },
    #[error("length mismatch: {predictions} predictions for {labels} labels")]
    LengthMismatch { predictions: usize, labels: usize },
    #[error("empty input")]
    EmptyInput,
    #[error("{n} players exceed the exhaustive cap of {cap}; use the Monte Carlo estimator")]
    CapExceeded { n: usize, cap: usize },
    #[error("evaluator failed on coalition {coalition}: {message}")]
    Evaluator { coalition: String, message: String },
    #[error("prediction {value} out of range for {num_classes} classes (coalition {coalition})")]
    PredictionOutOfRange {
        coalition: String,
        value: usize,
        num_classes: usize,
    },
    #[error("full-model accuracy is zero; normalized scores are undefined")]
    ZeroAccuracy,
    #[error("player {0} is out of range")]
    UnknownPlayer(usize),
    #[error("player {0} is already in the coalition")]
    PlayerInCoalition(usize),
    #[error("invalid game: {0}")]
    InvalidGame(String),
    #[error("Monte Carlo estimation needs at least 2 draws, got {0}")]
    TooFewDraws(usize),
    #[error("cooperation needs a set of at least 2 modalities, got {0}")]
    CoalitionTooSmall(usize),
    #[error("scoring needs at least 2 modalities, got {0}")]
    TooFewModalities(usize),
    #[error("invalid regime spec: {0}")]
    InvalidSpec(String),
    #[error("incomplete utility table")]
    IncompleteTable,
}
