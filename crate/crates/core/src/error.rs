use thiserror::Error;

#[derive(Debug, Error)]
pub enum PhError {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid mesh: {0}")]
    Validation(String),
    #[error("degree error: {0}")]
    Degree(String),
    #[error("cochain belongs to mesh {got}, expected mesh {expected}")]
    MeshMismatch { expected: u64, got: u64 },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("input not solenoidal: interior divergence {residual:e}")]
    NotSolenoidal { residual: f64 },
    #[error("incompatible Neumann data: net flux {net:e}")]
    Incompatible { net: f64 },
    #[error("harmonic component unsupported: b0 = {b0}, b1 = {b1}")]
    HarmonicUnsupported { b0: usize, b1: usize },
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("formulation mismatch: {0}")]
    Formulation(String),
    #[error("step rejected at t = {t:e}: {msg}")]
    StepRejected { t: f64, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, PhError>;
