use thiserror::Error;

#[derive(Debug, Error)]
pub enum CurvError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("metric is not positive definite (smallest eigenvalue {0:e})")]
    NotPositiveDefinite(f64),
    #[error("tensor fails the {symmetry} symmetry at {index:?} (residual {residual:e})")]
    Symmetry {
        symmetry: &'static str,
        index: [usize; 4],
        residual: f64,
    },
    #[error("frame is not adapted to the subbundle: {0}")]
    NotAdapted(String),
    #[error("{0} requires a Kähler-symmetric tensor")]
    NotKahler(&'static str),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("degenerate curve: {0}")]
    DegenerateCurve(String),
    #[error("roots {i} and {j} are {distance:e} apart")]
    NearDegenerateRoots { i: usize, j: usize, distance: f64 },
    #[error("mesh failure: {0}")]
    Mesh(String),
    #[error("Newton iteration did not converge; residual history {history:?}")]
    NewtonDiverged { history: Vec<f64> },
    #[error("sparse factorization failed: {0}")]
    Factorization(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, CurvError>;
