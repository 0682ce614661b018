use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("skew parameter must have unit norm, got {0}")]
    NonUnitAxis(f64),
    #[error("invalid material: {0}")]
    InvalidMaterial(String),
    #[error("matrix argument must be symmetric")]
    NotSymmetric,
    #[error("mesh subdivision count must be at least 1")]
    ZeroSubdivisions,
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("mesh is degenerate (zero area)")]
    DegenerateMesh,
    #[error("mesh must be frame-normalized (centered, principal axes)")]
    NotNormalized,
    #[error("size mismatch: expected {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("load is not equilibrated (force residual {force:.3e}, moment residual {moment:.3e})")]
    NotEquilibrated { force: f64, moment: f64 },
    #[error("compatibility is violated: {0}")]
    IncompatibleLoad(String),
    #[error("parameter out of range: {0}")]
    BadParameter(String),
    #[error("energy is infinite (orientation constraint violated)")]
    InfiniteEnergy,
    #[error("inner minimization did not converge: {0}")]
    InnerMinimization(String),
    #[error("linear solver breakdown: {0}")]
    SolverBreakdown(String),
    #[error("mesh file parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
