use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cell {cell}: vertex loop is not counterclockwise (signed area {area:e})")]
    Orientation { cell: usize, area: f64 },

    #[error("cell {cell}: vertex loop is not a simple polygon")]
    NotSimple { cell: usize },

    #[error("topology error: {0}")]
    Topology(String),

    #[error("conformity error: {0}")]
    Conformity(String),

    #[error("interface not aligned with the grid: {0}")]
    Alignment(String),

    #[error("triangulation failed: {0}")]
    Triangulation(String),

    #[error("degenerate geometry: {0}")]
    Degenerate(String),

    #[error("point ({x}, {y}) is outside the domain of definition")]
    Domain { x: f64, y: f64 },

    #[error("Gram factorization failed on cell {cell} for degree {degree}")]
    Conditioning { cell: usize, degree: usize },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("invalid parameters: {0}")]
    Parameter(String),

    #[error("assembly error: {0}")]
    Assembly(String),

    #[error("internal consistency error: {0}")]
    Internal(String),

    #[error("matrix is not positive definite (p'Ap = {curvature:e} at iteration {iteration})")]
    Indefinite { iteration: usize, curvature: f64 },

    #[error("solver did not converge in {iterations} iterations (relative residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("exact solution check failed: {0}")]
    Transcription(String),

    #[error("rate undefined: {0}")]
    UndefinedRate(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
