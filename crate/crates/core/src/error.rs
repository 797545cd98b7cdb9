use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("distance matrix is not square: row {row} has {len} entries, expected {expected}")]
    NonSquare { row: usize, len: usize, expected: usize },
    #[error("label count {labels} does not match matrix size {size}")]
    LabelMismatch { labels: usize, size: usize },
    #[error("subset must be non-empty")]
    EmptySubset,
    #[error("index {index} out of range for {len} points")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("tree has no vertices")]
    EmptyTree,
    #[error("edge {a}-{b} closes a cycle")]
    Cycle { a: u64, b: u64 },
    #[error("graph is disconnected: vertex {0} unreachable")]
    Disconnected(u64),
    #[error("edge {a}-{b} has nonpositive length {len}")]
    NonPositiveLength { a: u64, b: u64, len: f64 },
    #[error("duplicate vertex id {0}")]
    DuplicateVertex(u64),
    #[error("unknown vertex {0}")]
    UnknownVertex(u64),
    #[error("radius must be nonnegative, got {0}")]
    NegativeRadius(f64),
    #[error("resolution must be positive, got {0}")]
    NonPositiveResolution(f64),
    #[error("wedge sum needs at least one part")]
    EmptyWedge,
    #[error("replacement {entry}: host distance {host} differs from marked distance {marked}")]
    ReplacementLengthMismatch { entry: usize, host: f64, marked: f64 },
    #[error("replacement segments {first} and {second} share {shared} vertices")]
    ReplacementOverlap { first: usize, second: usize, shared: usize },
    #[error("replacement {entry}: interior vertex {vertex} carries other branches")]
    ReplacementInteriorBranch { entry: usize, vertex: u64 },
    #[error("space sizes {x} and {y} exceed exact-search cap {cap}")]
    CapExceeded { x: usize, y: usize, cap: usize },
    #[error("correspondence does not cover point {index} of the {side} space")]
    NotCovering { side: &'static str, index: usize },
    #[error("sequence lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("branch index {index} out of range 0..={max}")]
    BranchOutOfRange { index: usize, max: usize },
    #[error("branch choice {k} outside 1..={m}")]
    InvalidBranch { k: usize, m: usize },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("no certified star: {0}")]
    NoCertifiedStar(String),
    #[error("ambiguous star: two largest components tie within tolerance")]
    AmbiguousStar,
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("schema violation: {0}")]
    Schema(String),
    #[error("parse error: {0}")]
    Parse(String),
}
