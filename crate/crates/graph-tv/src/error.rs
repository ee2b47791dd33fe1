use thiserror::Error;

/// Errors raised while constructing or validating a problem graph.
#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("edge {edge} has non-positive smoothing parameter {lambda}")]
    NonPositiveLambda { edge: usize, lambda: f64 },
    #[error("vertex {vertex} has negative weight {weight}")]
    NegativeWeight { vertex: usize, weight: f64 },
    #[error("edge {edge} is a self-loop at vertex {vertex}")]
    SelfLoop { edge: usize, vertex: usize },
    #[error("vertices {a} and {b} are joined by more than one edge")]
    ParallelEdge { a: usize, b: usize },
    #[error("edge {edge} references vertex {vertex}, but the graph has {n} vertices")]
    IndexOutOfRange { edge: usize, vertex: usize, n: usize },
    #[error("{what}: expected length {expected}, got {got}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("data has {got} values but the grid shape holds {expected}")]
    ShapeMismatch { expected: usize, got: usize },
}

#[derive(Debug, Error, PartialEq)]
pub enum DelaunayError {
    #[error("triangulation needs at least 3 distinct points, got {0}")]
    TooFewPoints(usize),
    #[error("all input points are collinear")]
    AllCollinear,
    #[error("point {index} has non-finite coordinates")]
    NonFinitePoint { index: usize },
}

#[derive(Debug, Error, PartialEq)]
pub enum ForestError {
    #[error("activating edge {0} would create a cycle")]
    WouldCreateCycle(usize),
    #[error("edge {0} is not in the active set")]
    EdgeNotActive(usize),
}

#[derive(Debug, Error, PartialEq)]
pub enum SolveError {
    #[error("graph data, weights or smoothing parameters are not finite")]
    NonFiniteData,
    #[error("event limit exceeded while satisfying edge {edge} ({events} events)")]
    IterationLimitExceeded { edge: usize, events: usize },
    #[error("no feasible event for edge {edge}")]
    NoFeasibleEvent { edge: usize },
    #[error("region of vertex {vertex} contains no positive-weight observation")]
    EmptyRegionMean { vertex: usize },
    #[error(transparent)]
    Forest(#[from] ForestError),
}

#[derive(Debug, Error, PartialEq)]
pub enum ParamError {
    #[error("sigma estimation needs at least one edge")]
    NoEdges,
    #[error("sigma must be positive, got {0}")]
    NonPositiveSigma(f64),
    #[error("residual target {target} exceeds the residual {max} of the constant fit")]
    TargetUnreachable { target: f64, max: f64 },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("{what}: expected length {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("coordinate oracle failed to converge within the iteration budget")]
    NotConverged,
}
