use thiserror::Error;

/// Errors raised while building or validating a mesh.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("tetrahedron {tet} references vertex {vertex}, but only {count} vertices exist")]
    VertexOutOfRange { tet: usize, vertex: usize, count: usize },
    #[error("tetrahedron {0} repeats a vertex")]
    RepeatedVertex(usize),
    #[error("tetrahedron {tet} is degenerate (|det J| = {det:e} below threshold {threshold:e})")]
    Degenerate { tet: usize, det: f64, threshold: f64 },
    #[error("mesh is not matching: {0}")]
    NonMatching(String),
    #[error("boundary face {0:?} carries no Dirichlet/Neumann tag")]
    UntaggedBoundaryFace([usize; 3]),
    #[error("tag given for {0:?}, which is not a boundary face of the mesh")]
    TagOnNonBoundaryFace([usize; 3]),
    #[error("boundary face {0:?} is tagged twice")]
    DuplicateTag([usize; 3]),
    #[error("edge {edge}: {reason}")]
    InvalidPatch { edge: usize, reason: String },
    #[error("edge id {0} out of range")]
    EdgeOutOfRange(usize),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Errors from the finite element layer and the solvers built on it.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error("quadrature of degree {0} is not tabulated (maximum {1})")]
    QuadratureDegree(usize, usize),
    #[error("polynomial degree {0} is not supported (maximum {1})")]
    UnsupportedDegree(usize, usize),
    #[error("singular system: {0}")]
    Singular(String),
    #[error("infeasible element problem on tetrahedron {tet}: constraint residual {residual:e}")]
    Infeasible { tet: usize, residual: f64 },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
