use std::path::PathBuf;

/// Errors surfaced by the pipeline.
///
/// Per-record problems (a malformed message, a bad timestamp row) are not
/// errors: they are counted in the owning stage's report and processing
/// continues. This enum covers the fatal cases only.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("unreadable archive stream: {0}")]
    UnreadableStream(String),

    #[error("missing required column `{column}` in {path}")]
    MissingColumn { column: String, path: PathBuf },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("non-finite value ({value}) produced at step `{step}`")]
    Numeric { step: String, value: f64 },

    #[error("training corpus contains a single class ({0}); both graduated and retired projects are required")]
    SingleClass(String),

    #[error("missing upstream artifact for stage `{stage}`: {path}")]
    MissingArtifact { stage: String, path: PathBuf },

    #[error("singular weighted system in surrogate fit (after ridge escalation)")]
    SingularSurrogate,

    #[error("unknown feature `{0}`")]
    UnknownFeature(String),

    #[error("checkpoint rejected: {0}")]
    Checkpoint(String),

    #[error("{0}")]
    Other(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
