use crate::model::Edge;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("cost matrix must be {expected}x{expected}, found {found}")]
    Shape { expected: usize, found: String },

    #[error("cost entry ({row}, {col}) is NaN")]
    NotANumber { row: usize, col: usize },

    #[error("entity index {index} out of range for {len} entities")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("route is empty")]
    EmptyRoute,

    #[error("plan does not partition the entities: {0}")]
    NotAPartition(String),

    #[error("cost table is not in metric mode: {0}")]
    NotMetricMode(String),

    #[error("metric precondition failed: {0}")]
    AxiomPrecondition(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("task {task} cannot be reached in bid round {round}: every candidate bid is infinite")]
    UnreachableTask { task: usize, round: usize },

    #[error("malformed auction outcome: {0}")]
    MalformedOutcome(String),

    #[error("sensitivity analysis needs distinct bid costs; tied edges: {}", format_ties(.ties))]
    TiedCosts { ties: Vec<(Edge, Edge)> },

    #[error("initial upper bound for round {round} is {value}, outside [0, {limit})")]
    InitialBound { round: usize, value: f64, limit: f64 },

    #[error("exhaustive oracle limited to m <= {max_m} and n <= {max_n}, got m = {m}, n = {n}")]
    SizeGuard {
        m: usize,
        n: usize,
        max_m: usize,
        max_n: usize,
    },

    #[error("position of entity {index} lies inside obstacle {obstacle}")]
    InsideObstacle { index: usize, obstacle: usize },

    #[error("invalid obstacle {index}: {reason}")]
    InvalidObstacle { index: usize, reason: String },

    #[error("invalid input: {0}")]
    Input(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn format_ties(ties: &[(Edge, Edge)]) -> String {
    ties.iter()
        .map(|(a, b)| format!("{a}={b}"))
        .collect::<Vec<_>>()
        .join(", ")
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
