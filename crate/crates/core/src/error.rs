use thiserror::Error;

/// Errors raised while building graphs, conditions and spectra.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("edge list is empty")]
    EmptyGraph,
    #[error("edge {edge} ({i}, {j}) is a loop")]
    LoopEdge { edge: usize, i: usize, j: usize },
    #[error("edge {edge} ({i}, {j}) duplicates edge {first}")]
    DuplicateEdge {
        edge: usize,
        first: usize,
        i: usize,
        j: usize,
    },
    #[error("edge {edge} has non-positive length {length}")]
    NonpositiveLength { edge: usize, length: f64 },
    #[error("edge {edge} references vertex {vertex} but the graph has {vertex_count} vertices")]
    VertexOutOfRange {
        edge: usize,
        vertex: usize,
        vertex_count: usize,
    },
    #[error("graph is disconnected: edge {edge} ({i}, {j}) is not reachable from vertex 0")]
    DisconnectedGraph { edge: usize, i: usize, j: usize },
    #[error("vertex {vertex} is isolated")]
    IsolatedVertex { vertex: usize },
    #[error("coordinate {x} is outside [0, {length}] on bond {bond}")]
    OutOfRange { bond: usize, x: f64, length: f64 },
    #[error("{0} is not an odd prime")]
    NotPrime(i64),
    #[error("no equi-transmitting construction for degree {0} (degree - 1 must be an odd prime)")]
    UnsupportedDegree(usize),
    #[error("vertex {vertex} has degree {degree} but its scattering matrix is {size}x{size}")]
    DegreeMismatch {
        vertex: usize,
        degree: usize,
        size: usize,
    },
    #[error("no scattering matrix supplied for vertex {0}")]
    MissingCondition(usize),
    #[error("matrix for vertex {vertex} is not unitary (residual {residual:e})")]
    NotUnitary { vertex: usize, residual: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("kappa = {kappa} is not a spectral point (gap {gap:e} > tolerance {tolerance:e})")]
    NotAnEigenvalue {
        kappa: f64,
        gap: f64,
        tolerance: f64,
    },
    #[error("vector is zero")]
    ZeroVector,
    #[error("argument {0} must be positive")]
    NonpositiveArgument(f64),
    #[error("unsupported order: {0}")]
    UnsupportedOrder(String),
    #[error("bound not applicable: {0}")]
    NotApplicable(String),
    #[error("graph is not a star")]
    NotAStar,
    #[error("invalid range: {0}")]
    BadRange(String),
    #[error("ensemble is empty")]
    EmptyEnsemble,
}

pub type Result<T> = std::result::Result<T, Error>;
