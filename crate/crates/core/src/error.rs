use std::path::PathBuf;

/// Errors raised across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid variable spec `{name}`: {reason}")]
    InvalidVariable { name: String, reason: String },

    #[error("value {value} is outside the domain of `{variable}`")]
    OutOfDomain { variable: String, value: f64 },

    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("unknown domain `{0}`")]
    UnknownDomain(String),

    #[error("unknown method `{0}`")]
    UnknownMethod(String),

    #[error("action {action} is not available (domain has {available} actions)")]
    UnknownAction { action: usize, available: usize },

    #[error("invalid map: {0}")]
    InvalidMap(String),

    #[error("could not sample a solvable task after {attempts} attempts: {reason}")]
    SamplerExhausted { attempts: usize, reason: String },

    #[error("abstract state is unsplittable")]
    Unsplittable,

    #[error("node not found in abstraction tree: {0}")]
    NodeNotFound(String),

    #[error("abstraction trees do not share a lineage: {0}")]
    Lineage(String),

    #[error("stale leaf {0}: not a current leaf of the tree")]
    StaleLeaf(usize),

    #[error("inputs are misaligned: {0}")]
    Misaligned(String),

    #[error("invalid budget: {0}")]
    InvalidBudget(String),

    #[error("invalid hyperparameters: {0}")]
    InvalidHyper(String),

    #[error("no successful rollout within {0} attempts")]
    RolloutFailed(usize),

    #[error("inapplicable option: state is outside its initiation set")]
    InapplicableOption,

    #[error("invalid option signature: {0}")]
    InvalidSignature(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
