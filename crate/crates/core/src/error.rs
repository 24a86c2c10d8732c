use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("degenerate Voronoi generators after {attempts} attempts: {message}")]
    DegenerateGenerators { attempts: usize, message: String },

    #[error("self-intersecting polygon: {0}")]
    SelfIntersecting(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("element {cell}: plane wave matrix G is numerically singular (h_K k = {hk:.4e}, condition {condition:.3e})")]
    SingularElement { cell: usize, hk: f64, condition: f64 },

    #[error("element {cell}: weighted plane wave Gram matrix is degenerate (h_K k = {hk:.4e})")]
    DegenerateBasis { cell: usize, hk: f64 },

    #[error("linear solve failed (h = {h:.4e}, k = {k}, p = {p}): {message}")]
    Conditioning { h: f64, k: f64, p: usize, message: String },

    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
