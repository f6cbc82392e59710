//! Error types, grouped by the layer that raises them.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("boxes must have dimension >= 1")]
    EmptyDimension,
    #[error("inverted bounds in dimension {dim}: lo={lo}, hi={hi}")]
    InvertedBounds { dim: usize, lo: f64, hi: f64 },
    #[error("split parts must be >= 1 (dimension {dim})")]
    ZeroParts { dim: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReachError {
    #[error("invalid Jacobian bounds from provider: a={a} > b={b} at ({i},{j}) of family {family}")]
    InvalidBounds { family: char, i: usize, j: usize, a: f64, b: f64 },
    #[error("bounds table shape mismatch for family {family}: expected {expected} columns, got {got}")]
    ShapeMismatch { family: char, expected: usize, got: usize },
    #[error("integration produced a non-finite state at step {step}")]
    NonFiniteState { step: usize },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LtlError {
    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("undeclared atom `{atom}` at position {position}")]
    UndeclaredAtom { atom: String, position: usize },
    #[error("no accepting path: the formula is unrealizable on the region transition system")]
    Unrealizable,
    #[error("initial region `{0}` is not declared")]
    UnknownInitialRegion(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("invalid cell index {0}")]
    InvalidCell(usize),
    #[error("cell {0} is an obstacle")]
    ObstacleCell(usize),
    #[error("plan infeasible: no obstacle-free path from cell {from} to cell {to}")]
    Infeasible { from: usize, to: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RefineError {
    #[error("refinement budget exhausted after {iterations} iterations (plan step {step})")]
    BudgetExhausted { iterations: usize, step: usize },
    #[error("split depth limit {max_depth} reached for a leaf of cell {cell}")]
    MaxDepth { cell: usize, max_depth: u8 },
    #[error("state {state:?} is outside every valid set of the current plan step")]
    OutsideValidSets { state: Vec<f64> },
    #[error("state {state:?} lies in an obstacle or outside the workspace")]
    OutsideWorkspace { state: Vec<f64> },
    #[error(transparent)]
    Reach(#[from] ReachError),
}

/// Pipeline-level error, tagged with the layer that failed.
#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("scenario configuration error: {0}")]
    Config(String),
    #[error("layer 1 (LTL planning) failed: {0}")]
    Layer1(#[from] LtlError),
    #[error("layer 2 (discrete planning) failed for pair ({from}, {to}): {source}")]
    Layer2 {
        from: String,
        to: String,
        #[source]
        source: GridError,
    },
    #[error("layer 3 (abstraction refinement) failed for plan {plan}: {source}")]
    Layer3 {
        plan: String,
        #[source]
        source: RefineError,
    },
    #[error("simulation error: {0}")]
    Simulation(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl PipelineError {
    /// Process exit code distinguishing the failing layer.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) => 2,
            PipelineError::Layer1(_) => 10,
            PipelineError::Layer2 { .. } => 11,
            PipelineError::Layer3 { .. } => 12,
            PipelineError::Simulation(_) => 13,
            PipelineError::Io(_) => 3,
        }
    }
}
