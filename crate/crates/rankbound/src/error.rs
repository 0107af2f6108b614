use thiserror::Error;

/// Crate-wide error type; constructors validate, operations stay infallible.
#[derive(Debug, Error)]
pub enum Error {
    #[error("score must be finite, got {0}")]
    NonFiniteScore(f64),
    #[error("negative score list must be non-empty")]
    EmptyNegatives,
    #[error("rank must be at least 1")]
    ZeroRank,
    #[error("expected exactly one negative score, got {0}")]
    NotSingleNegative(usize),
    #[error("sample size {k} exceeds population size {population}")]
    SampleTooLarge { k: usize, population: usize },
    #[error("sample size must be positive")]
    ZeroSampleSize,
    #[error("trial count must be positive")]
    ZeroTrials,
    #[error("success count {successes} exceeds population size {population}")]
    SuccessesExceedPopulation { successes: usize, population: usize },
    #[error("draw count {draws} exceeds population size {population}")]
    DrawsExceedPopulation { draws: usize, population: usize },
    #[error(
        "query successes {successes} inconsistent with rank {rank}; \
         BPR and CCE bounds require successes = rank - 1"
    )]
    SuccessesRankMismatch { successes: usize, rank: usize },
    #[error("gamma0 = {gamma0} must be at least gamma = {gamma} and at most N = {population}")]
    InvalidGamma0 { gamma0: usize, gamma: usize, population: usize },
    #[error("bound ordering violated: bce {bce} < bpr {bpr} or bpr < cce {cce}")]
    OrderingViolation { bce: f64, bpr: f64, cce: f64 },
    #[error("full-catalog score set required, got a sampled one")]
    ExpectedFullScores,
    #[error("sampled score set required, got a full-catalog one")]
    ExpectedSampledScores,
    #[error("{0} list must be non-empty")]
    EmptyList(&'static str),
    #[error("history-mean scorer needs a non-empty history")]
    EmptyHistory,
    #[error("{path}:{line}: malformed interaction row: {message}")]
    MalformedRow { path: String, line: usize, message: String },
    #[error("dataset contains no usable interactions")]
    EmptyDataset,
    #[error("user {user} has {events} events; leave-last-out needs at least 3")]
    UserTooShort { user: String, events: usize },
    #[error(
        "user {user} has only {available} non-interacted items, \
         cannot draw {requested} negatives"
    )]
    NotEnoughNegatives { user: String, available: usize, requested: usize },
    #[error("{0} must have one entry per user")]
    LengthMismatch(&'static str),
    #[error("item id {item} outside catalog of size {n_items}")]
    ItemOutOfRange { item: usize, n_items: usize },
    #[error("invalid hyperparameter: {0}")]
    InvalidHyperparameter(&'static str),
    #[error("embedding dimension must be positive")]
    ZeroDim,
    #[error("batch size must be positive")]
    ZeroBatchSize,
    #[error("evaluation cutoff must be positive")]
    ZeroCutoff,
    #[error("non-finite loss at epoch {epoch}, step {step}; training diverged")]
    Diverged { epoch: usize, step: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("{path}")]
    Csv { path: String, source: csv::Error },
}

pub type Result<T> = std::result::Result<T, Error>;
