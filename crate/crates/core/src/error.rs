use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("grid side must be at least 2, got {0}")]
    InvalidSide(usize),

    #[error("step count must be at least 1")]
    ZeroSteps,

    #[error("search requires an odd step count, got t = {0}")]
    EvenSteps(u32),

    #[error("vertex {vertex} out of range for a grid with {count} vertices")]
    VertexOutOfRange { vertex: usize, count: usize },

    #[error("label sequence has length {actual}, expected {expected}")]
    PathLength { expected: usize, actual: usize },

    #[error("{what} needs {required} but the budget is {budget}")]
    BudgetExceeded {
        what: &'static str,
        required: usize,
        budget: usize,
    },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("{name} = {value} is outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("invalid Markov chain: {0}")]
    InvalidChain(String),

    #[error("degenerate spectral model: the target has no overlap with any walk eigenvector")]
    DegenerateModel,

    #[error("infeasible schedule: {0}")]
    Infeasible(String),
}
