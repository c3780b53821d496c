//! A small, deterministic NSGA-II engine.
//!
//! The engine works on real-coded genomes with optional categorical genes
//! (stored as integral `f64` indices). All objectives are minimized; encode a
//! maximized quantity by negating it.
//!
//! Reproducibility: a single master seed is split into independent ChaCha
//! streams, one per purpose (initialization, repair, tournament, crossover,
//! mutation). Objective evaluation runs in parallel, but every random draw is
//! taken sequentially, so results never depend on the thread count.

mod engine;
mod error;
pub mod operators;
pub mod sorting;

pub use engine::{evolve, EvolveOutcome, GenerationStats, Nsga2Params, Problem};
pub use error::{EvolveError, Nsga2Error};
pub use operators::{polynomial_mutation, sbx_crossover};
pub use sorting::{
    crowded_compare, crowding_distance, dominates, fast_nondominated_sort, ParetoFront, Winner,
};

use rand::Rng;

/// Bounds and kind of a single decision variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GeneSpec {
    /// Continuous gene in `[lower, upper]`.
    Real { lower: f64, upper: f64 },
    /// Index into a finite set of `choices` options, stored as `0.0, 1.0, ...`.
    Categorical { choices: usize },
}

impl GeneSpec {
    pub fn real(lower: f64, upper: f64) -> Self {
        GeneSpec::Real { lower, upper }
    }

    pub fn categorical(choices: usize) -> Self {
        GeneSpec::Categorical { choices }
    }

    /// Uniform draw from the gene's domain.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            GeneSpec::Real { lower, upper } => {
                if upper > lower {
                    lower + (upper - lower) * rng.gen::<f64>()
                } else {
                    lower
                }
            }
            GeneSpec::Categorical { choices } => rng.gen_range(0..choices.max(1)) as f64,
        }
    }

    /// Project a value back into the domain.
    pub fn clamp(&self, value: f64) -> f64 {
        match *self {
            GeneSpec::Real { lower, upper } => value.clamp(lower, upper),
            GeneSpec::Categorical { choices } => {
                let max = choices.saturating_sub(1) as f64;
                value.round().clamp(0.0, max)
            }
        }
    }

    pub fn contains(&self, value: f64) -> bool {
        match *self {
            GeneSpec::Real { lower, upper } => value >= lower && value <= upper,
            GeneSpec::Categorical { choices } => {
                value.fract() == 0.0 && value >= 0.0 && (value as usize) < choices
            }
        }
    }

    fn is_valid(&self) -> bool {
        match *self {
            GeneSpec::Real { lower, upper } => lower.is_finite() && upper.is_finite() && lower <= upper,
            GeneSpec::Categorical { choices } => choices > 0,
        }
    }
}

/// Objective values of one individual. Every component is minimized.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveVector(pub Vec<f64>);

impl ObjectiveVector {
    pub fn new(values: Vec<f64>) -> Self {
        ObjectiveVector(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl From<Vec<f64>> for ObjectiveVector {
    fn from(values: Vec<f64>) -> Self {
        ObjectiveVector(values)
    }
}

/// A genome together with its evaluation and NSGA-II bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub genes: Vec<f64>,
    pub objectives: ObjectiveVector,
    /// Nondomination rank, starting at 1 for the first front.
    pub rank: usize,
    /// Crowding distance within the individual's front (may be `+inf`).
    pub crowding: f64,
    pub feasible: bool,
}
