use thiserror::Error;

use crate::complex::VertexId;

pub type Result<T> = std::result::Result<T, NpcError>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NpcError {
    #[error("expected a {expected} complex, found {found}")]
    KindMismatch { expected: &'static str, found: &'static str },
    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),
    #[error("vertices {0} and {1} are in different components")]
    Disconnected(VertexId, VertexId),
    #[error("cap exceeded: {count} items, cap {cap}")]
    CapExceeded { count: u64, cap: u64 },
    #[error("complex is not flag: empty 3-clique {0:?}")]
    NotFlag([VertexId; 3]),
    #[error("fill failed: {0}")]
    FillFailed(String),
    #[error("bound violated: {bound} (value {value})")]
    BoundViolated { bound: &'static str, value: usize },
    #[error("not a metric triangle: {0:?}")]
    NotMetricTriangle([VertexId; 3]),
    #[error("presentation is not C'(1/6): {0}")]
    NotC16(String),
    #[error("presentation does not give a simplicial complex: {0}")]
    NotSimplicial(String),
    #[error("no diagram of area <= {0} fills the loop")]
    NotFillable(usize),
    #[error("diagram cell {0} is not a triangle")]
    NotTriangulated(usize),
    #[error("diagram is unclassifiable: {0}")]
    Unclassifiable(String),
    #[error("geodesic does not meet the subcomplex")]
    DoesNotGoThrough,
    #[error("geodesic ends inside the subcomplex")]
    EndsInside,
    #[error("no path around the subcomplex between the given edges")]
    NoPath,
    #[error("probe was not exhaustive")]
    NonExhaustiveProbe,
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("parse error at line {line}, column {column}: {msg}")]
    Parse { line: usize, column: usize, msg: String },
    #[error("unsupported format {found:?}, expected {expected:?}")]
    SchemaVersion { found: String, expected: &'static str },
    #[error("i/o error on {path}: {msg}")]
    Io { path: String, msg: String },
}

impl NpcError {
    /// Short stable name used in reports.
    pub fn class(&self) -> &'static str {
        match self {
            NpcError::KindMismatch { .. } => "KindMismatch",
            NpcError::UnknownVertex(_) => "UnknownVertex",
            NpcError::Disconnected(..) => "Disconnected",
            NpcError::CapExceeded { .. } => "CapExceeded",
            NpcError::NotFlag(_) => "NotFlag",
            NpcError::FillFailed(_) => "FillFailed",
            NpcError::BoundViolated { .. } => "BoundViolated",
            NpcError::NotMetricTriangle(_) => "NotMetricTriangle",
            NpcError::NotC16(_) => "NotC16",
            NpcError::NotSimplicial(_) => "NotSimplicial",
            NpcError::NotFillable(_) => "NotFillable",
            NpcError::NotTriangulated(_) => "NotTriangulated",
            NpcError::Unclassifiable(_) => "Unclassifiable",
            NpcError::DoesNotGoThrough => "DoesNotGoThrough",
            NpcError::EndsInside => "EndsInside",
            NpcError::NoPath => "NoPath",
            NpcError::NonExhaustiveProbe => "NonExhaustiveProbe",
            NpcError::InvalidSpec(_) => "InvalidSpec",
            NpcError::InvalidInput(_) => "InvalidInput",
            NpcError::Parse { .. } => "ParseError",
            NpcError::SchemaVersion { .. } => "SchemaVersionError",
            NpcError::Io { .. } => "IoError",
        }
    }
}
