use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Nsga2Error {
    #[error("objective vectors have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
}

#[derive(Debug, Error)]
pub enum EvolveError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("evaluation failed in generation {generation} for individual {individual}: {message}")]
    Evaluation {
        generation: usize,
        individual: usize,
        message: String,
    },
    #[error("could not produce a feasible individual in generation {generation}")]
    Infeasible { generation: usize },
    #[error(transparent)]
    Sorting(#[from] Nsga2Error),
}
