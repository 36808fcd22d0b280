use thiserror::Error;

/// Errors produced by the lattice, graph, sampling and estimation layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain too small: {0}")]
    DomainTooSmall(String),
    #[error("radius too small: component of the origin has {0} vertices")]
    RadiusTooSmall(usize),
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("edge {0} not found")]
    EdgeNotFound(usize),
    #[error("vertex {0} not found")]
    VertexNotFound(usize),
    #[error("graph is disconnected")]
    Disconnected,
    #[error("iterative solver did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("graph too large for {what}: {size} > {limit}")]
    TooLarge {
        what: &'static str,
        size: usize,
        limit: usize,
    },
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("edge set is not a forest: edge {0} closes a cycle")]
    Cycle(usize),
    #[error("edge set is not a spanning tree: {0}")]
    NotSpanningTree(String),
    #[error("target set unreachable from start vertex {0}")]
    Unreachable(usize),
    #[error("vertices {0} and {1} lie in different components")]
    DifferentComponents(usize, usize),
    #[error("unknown component id {0}")]
    UnknownComponent(usize),
    #[error("duality: {0}")]
    Duality(String),
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("insufficient input: {0}")]
    InsufficientInput(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("worker pool: {0}")]
    Pool(String),
}

pub type Result<T> = std::result::Result<T, Error>;
