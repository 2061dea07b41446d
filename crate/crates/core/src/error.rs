use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("edge {edge:?} is invalid: {reason}")]
    InvalidEdge { edge: Vec<usize>, reason: String },

    #[error("unknown edge identifier {0}")]
    UnknownEdge(usize),

    #[error("operation requires a graph (r = 2), host has uniformity {0}")]
    NotAGraph(usize),

    #[error("duplicate vertex {0} in vertex list")]
    DuplicateVertex(usize),

    #[error("vertex list of length {len} exceeds uniformity {r}")]
    TooManyVertices { len: usize, r: usize },

    #[error("empty query: degrees are defined for non-empty queries only")]
    EmptyQuery,

    #[error("empty edge subset")]
    EmptySubset,

    #[error("arity mismatch: expected {expected}, got {got}")]
    ArityMismatch { expected: usize, got: usize },

    #[error("invalid pattern: {0}")]
    InvalidPattern(String),

    #[error("pattern {pattern} does not fit a host of uniformity {r}")]
    PatternHostMismatch { pattern: String, r: usize },

    #[error("bound index out of range: {0}")]
    BoundIndex(String),

    #[error("{what} = {value} exceeds guard {limit}")]
    GuardExceeded {
        what: &'static str,
        value: usize,
        limit: usize,
    },

    #[error("family is empty")]
    EmptyFamily,

    #[error("family members have differing edge counts ({0} vs {1})")]
    MixedEdgeCounts(usize, usize),

    #[error("hypergraph has no hyperedges (average degree 0)")]
    ZeroAverageDegree,

    #[error("co-degree function {value} exceeds eps = {eps} at tau = {tau}")]
    CodegreeTooHigh { value: f64, eps: f64, tau: f64 },

    #[error("degenerate tau = {0} (must lie in (0, 1))")]
    DegenerateTau(f64),

    #[error("no admissible tau in (0, 1): co-degree function at tau -> 1 is {0}, above eps = {1}")]
    NoAdmissibleTau(f64, f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("infeasible request: {0}")]
    Infeasible(String),

    #[error("pipeline aborted at level {level}, container {container}: {reason}")]
    PipelineAborted {
        level: usize,
        container: usize,
        reason: String,
    },

    #[error("invalid copy: {0}")]
    InvalidCopy(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
