use std::path::PathBuf;

/// Errors produced by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid MDP: {0}")]
    InvalidMdp(String),

    #[error("invalid policy: {0}")]
    InvalidPolicy(String),

    #[error("policy is not episodic on this MDP: {0}")]
    NonEpisodic(String),

    #[error("episode exceeded the step cap of {0} steps")]
    RunawayEpisode(usize),

    #[error("invalid feature map: {0}")]
    InvalidFeatureMap(String),

    #[error("least-squares weights must be non-negative with at least one positive entry")]
    BadWeights,

    #[error("rho must lie in [0, 1], got {0}")]
    RhoOutOfRange(f64),

    #[error("projected Bellman system is singular for this policy")]
    SingularProjection,

    #[error("{0} deterministic policies exceed the enumeration limit of {1}")]
    PolicyCountIntractable(f64, usize),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("csv input is missing required column `{0}`")]
    MissingColumn(String),

    #[error("csv input malformed: {0}")]
    MalformedCsv(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
