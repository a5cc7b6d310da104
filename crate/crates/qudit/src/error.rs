use thiserror::Error;

/// Errors raised by graph handling, scheduling, synthesis and protocol simulation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unknown graph `{name}`; available graphs: {available}")]
    UnknownGraph { name: String, available: String },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("graph is disconnected: node {node} is unreachable from {root}")]
    Disconnected { node: usize, root: usize },

    #[error("level {level} is out of range for d={d}")]
    LevelOutOfRange { level: usize, d: usize },

    #[error("({0},{1}) is not an edge of the coupling graph")]
    NotAnEdge(usize, usize),

    #[error("a rotation needs two distinct levels, got ({0},{0})")]
    DegenerateRotation(usize),

    #[error("invalid first-column plan: {0}")]
    InvalidPlan(String),

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("matrix is not unitary (defect {defect:.3e})")]
    NotUnitary { defect: f64 },

    #[error("phases sum to {sum} which is not 0 mod 2π; normalize to SU(d) first")]
    NotTraceless { sum: f64 },

    #[error("improper edge coloring: node {node} has two edges of color {color}")]
    ImproperColoring { node: usize, color: usize },

    #[error("phase edge ({j},{k}) starts at step {start} but its rows finish at step {finished}")]
    PhaseOrdering {
        j: usize,
        k: usize,
        start: usize,
        finished: usize,
    },

    #[error("matrix is not Hermitian (defect {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("d={d} exceeds the exhaustive branch cap of {cap}; use sampling")]
    ExhaustiveCap { d: usize, cap: usize },

    #[error("eigensolver failed: {0}")]
    Eigen(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

pub type Result<T> = std::result::Result<T, Error>;
