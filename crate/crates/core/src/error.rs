use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cell {cell} is degenerate (measure {measure:e})")]
    DegenerateCell { cell: usize, measure: f64 },

    #[error("non-conforming mesh: {0}")]
    NonConforming(String),

    #[error("inconsistent periodic identification: {0}")]
    Periodicity(String),

    #[error("unsupported polynomial degree {0}; expected 1, 2 or 3")]
    UnsupportedDegree(usize),

    #[error("node {0} has an empty patch")]
    EmptyPatch(usize),

    #[error("mesh format error at line {line}: {msg}")]
    MeshFormat { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("conjugate gradient did not converge in {iterations} iterations (relative residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("conjugate gradient breakdown: {0}")]
    Breakdown(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("step sizes must be positive (got {0:e})")]
    NonPositiveStep(f64),

    #[error("unknown problem '{0}'")]
    UnknownProblem(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("step {step} at t = {time:e}: {source}")]
    Step {
        step: usize,
        time: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn at_step(self, step: usize, time: f64) -> Self {
        match self {
            e @ Error::Step { .. } => e,
            e => Error::Step {
                step,
                time,
                source: Box::new(e),
            },
        }
    }
}
