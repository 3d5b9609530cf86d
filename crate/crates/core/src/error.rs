use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("hyperarc {index} has an empty {side} set")]
    EmptySide { index: usize, side: &'static str },
    #[error("hyperarc {index}: vertex {vertex} is in both the output and the input set")]
    OverlappingSides { index: usize, vertex: usize },
    #[error("hyperarc {index} duplicates hyperarc {first}")]
    DuplicateHyperarc { index: usize, first: usize },
    #[error("{what}[{index}] = {value} is not strictly positive")]
    NonpositiveWeight { what: &'static str, index: usize, value: f64 },
    #[error("vertex {vertex} out of range for {n_vertices} vertices")]
    VertexOutOfRange { vertex: usize, n_vertices: usize },
    #[error("expected {what} of length {expected}, got {actual}")]
    LengthMismatch { what: &'static str, expected: usize, actual: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("vertex {vertex} has degree 0, the simplified variant divides by the degree")]
    ZeroDegreeVertex { vertex: usize },
    #[error("p = {p} is outside the admissible range {range}")]
    POutOfRange { p: f64, range: &'static str },
    #[error("the state is identically zero")]
    ZeroFunction,

    #[error("initial state is constant; the renormalized quantity is undefined")]
    DegenerateInitial,
    #[error("no convergence after {iterations} iterations")]
    NotConverged { iterations: usize },
    #[error("every vertex is a boundary vertex")]
    EmptyInterior,
    #[error("the boundary condition is empty")]
    EmptyBoundary,
    #[error("boundary vertex {vertex} is listed twice")]
    DuplicateBoundaryVertex { vertex: usize },

    #[error("dense oracle limited to {limit} vertices, got {n_vertices}")]
    TooLarge { n_vertices: usize, limit: usize },
    #[error("Jacobi eigensolver did not converge in {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    #[error("interior system is singular")]
    SingularSystem,

    #[error("line {line}: expected two whitespace-separated tokens")]
    MalformedLine { line: usize },
    #[error("no usable input")]
    EmptyInput,
    #[error("unknown leader label {0:?}")]
    UnknownLeader(String),
    #[error("unknown vertex label {0:?}")]
    UnknownLabel(String),
    #[error("unsupported schema version {found} (expected {expected})")]
    SchemaVersionMismatch { found: u32, expected: u32 },
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn check_len(what: &'static str, expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::LengthMismatch { what, expected, actual })
    }
}
