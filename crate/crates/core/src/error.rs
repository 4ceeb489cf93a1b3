use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("degree mismatch: {0}")]
    DegreeMismatch(String),
    #[error("invalid attachment map: {0}")]
    InvalidAttachment(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("condition violated: {0}")]
    ConditionViolated(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("lambda = {lambda} lies within {guard:e} of the decoration's Dirichlet eigenvalue {pole}")]
    PoleProximity { lambda: f64, pole: f64, guard: f64 },
    #[error("interior solve is singular (reciprocal condition {rcond:e})")]
    SingularSolve { rcond: f64 },
    #[error("empty window ({lo}, {hi})")]
    EmptyWindow { lo: f64, hi: f64 },
    #[error("scan grid would need {points} points; narrow the window")]
    GridTooLarge { points: usize },
    #[error("mesh too coarse: h = {h} exceeds a quarter of the shortest edge ({min_length})")]
    MeshTooCoarse { h: f64, min_length: f64 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of the numerical kind (pole proximity, singular solves).
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::PoleProximity { .. } | Error::SingularSolve { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
