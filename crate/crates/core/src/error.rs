use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("graph is disconnected ({components} components)")]
    Disconnected { components: usize },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("metric `{0}` is not available on this graph")]
    MissingMetric(&'static str),

    #[error("node {0} is out of range")]
    NodeOutOfRange(u64),

    #[error("label fingerprint {found} does not match graph fingerprint {expected}")]
    FingerprintMismatch { expected: String, found: String },

    #[error("labels of nodes {0} and {1} share no hub")]
    EmptyIntersection(u32, u32),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
