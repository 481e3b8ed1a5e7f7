//! Shared error type for the whole crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("graph is not connected")]
    Disconnected,
    #[error("unknown edge id {0}")]
    UnknownEdge(u32),
    #[error("unknown vertex id {0}")]
    UnknownVertex(u32),
    #[error("unknown leg index {0}")]
    UnknownLeg(u32),
    #[error("edge ids must be 1..N contiguous")]
    NonContiguousEdgeIds,
    #[error("removing the marked edges disconnects the graph")]
    MarkedEdgesDisconnect,
    #[error("too many marked edges: {given} > loop number {loops}")]
    TooManyMarked { given: usize, loops: usize },
    #[error("cycle basis has rank {given}, expected {expected}")]
    BasisRank { given: usize, expected: usize },
    #[error("momentum conservation violated")]
    ConservationViolated,
    #[error("kinematics are not generic: subset {0:?} of legs has null total momentum")]
    NonGeneric(Vec<u32>),
    #[error("momentum routing violates conservation at vertex {0}")]
    InvalidRouting(u32),
    #[error("determinant of a quaternionic matrix is not defined; apply the complex adjoint first")]
    QuaternionicDeterminant,
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("index out of range")]
    IndexOutOfRange,
    #[error("basis change matrix must have determinant +-1, got {0}")]
    NotUnimodular(i64),
    #[error("subgraph is not mass-momentum spanning")]
    NotMassMomentumSpanning,
    #[error("matrix entries must be affine-linear in the edge variables")]
    NotAffineLinear,
    #[error("matrix determinant is identically zero")]
    SingularMatrix,
    #[error("internal consistency error: {0}")]
    Internal(String),
    #[error("form degree {form} does not match expected {expected}")]
    DegreeMismatch { form: usize, expected: usize },
    #[error("kind {0} is not available for dimension {1}")]
    KindDimension(String, u8),
    #[error("numerically singular matrix at sample point {0:?}")]
    SingularAtPoint(Vec<f64>),
    #[error("sample count {samples} must be >= batch count {batches} >= 2")]
    BadSampleConfig { samples: u64, batches: u32 },
    #[error("invalid form spec `{0}`")]
    BadFormSpec(String),
    #[error("dimension must be 2 or 4, got {0}")]
    BadDimension(u8),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("mass label {0} must have positive square")]
    MassNotPositive(u32),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
