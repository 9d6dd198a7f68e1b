use thiserror::Error;

/// Errors raised by the laboratory's operations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("invalid metric: {0}")]
    InvalidMetric(String),
    #[error("no path between vertices {0} and {1}")]
    NoPath(usize, usize),
    #[error("negative Gromov product {0} (triangle inequality violated)")]
    NegativeProduct(f64),
    #[error("empty input")]
    EmptyInput,
    #[error("level {0} coincides with a vertex value")]
    DegenerateLevel(f64),
    #[error("function is not {bound}-Lipschitz (measured {measured})")]
    LipschitzViolated { bound: f64, measured: f64 },
    #[error("inconsistent triangle: {0}")]
    InconsistentTriangle(String),
    #[error("embedded boundary self-intersects between segments {0} and {1}")]
    SelfIntersection(usize, usize),
    #[error("duplicate samples {0} and {1} at zero distance")]
    ZeroDistancePair(usize, usize),
    #[error("region is not a Jordan domain")]
    NotJordan,
    #[error("embedding failed: {0}")]
    EmbeddingFailed(String),
    #[error("domination failed for samples {0}, {1}: d_S = {2}, d = {3}")]
    DominationFailed(usize, usize, f64, f64),
    #[error("mismatched sampling: {0}")]
    MismatchedSampling(String),
    #[error("epsilon {0} is below the mesh resolution")]
    EpsilonTooSmall(f64),
    #[error("host boundary is not polygonal: {0}")]
    NonPolygonalBoundary(String),
    #[error("shared edge lengths differ: {0}")]
    EdgeMismatch(String),
    #[error("opposite sides are closer than 1 (min {0}); rescale by {1}")]
    SideDistanceBelowOne(f64, f64),
    #[error("no curve joins the given sets")]
    NoCurve,
    #[error("the sets lie in different components; no separation needed")]
    NoSeparationNeeded,
    #[error("iteration limit reached (upper {upper}, lower {lower})")]
    IterationLimit { upper: f64, lower: f64 },
    #[error("radii out of order: {0}")]
    RadiusOrder(String),
    #[error("inconsistent Cantor spec: {0}")]
    SpecInconsistent(String),
    #[error("level {0} out of range")]
    LevelOutOfRange(usize),
    #[error("unknown experiment {0}")]
    UnknownExperiment(String),
    #[error("invalid config: {0}")]
    ConfigInvalid(String),
    #[error("report schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}
