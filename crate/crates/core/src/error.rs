use thiserror::Error;

/// Errors raised by the library. Invariant failures of a well-formed graph are
/// not errors; they are reported through [`crate::graph::ValidationReport`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("{owner} refers to unknown vertex `{vertex}`")]
    UnknownVertex { owner: String, vertex: String },
    #[error("duplicate vertex id `{0}`")]
    DuplicateVertex(String),
    #[error("duplicate edge id `{0}`")]
    DuplicateEdge(String),
    #[error("unknown edge `{0}`")]
    UnknownEdge(String),
    #[error("graph has no vertices")]
    EmptyGraph,
    #[error("graph is disconnected")]
    Disconnected,
    #[error("subcurve must be non-empty and proper")]
    ImproperSubcurve,
    #[error("graph has {0} vertices; subset enumeration is limited to 24")]
    TooManyVertices(usize),
    #[error("invalid signature: {0}")]
    Signature(String),
    #[error("invalid polarization: {0}")]
    Polarization(String),
    #[error("degree mismatch: expected total {expected}, got {actual}")]
    DegreeMismatch { expected: i64, actual: i64 },
    #[error("multidegree has {actual} entries, graph has {expected} vertices")]
    MultidegreeLength { expected: usize, actual: usize },
    #[error("not an automorphism: {0}")]
    NotAnAutomorphism(String),
    #[error("invalid cover: {0}")]
    Cover(String),
    #[error("invalid taxonomy: {0}")]
    Taxonomy(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("search space too large: {0}")]
    SearchTooLarge(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
