use std::fmt::Display;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::operators::{polynomial_mutation, sbx_crossover};
use crate::sorting::{crowded_compare, crowding_distance, fast_nondominated_sort, Winner};
use crate::{EvolveError, GeneSpec, Individual, ObjectiveVector};

/// An optimization problem the engine can drive.
pub trait Problem: Sync {
    type Error: Display;

    fn gene_specs(&self) -> &[GeneSpec];

    fn objective_count(&self) -> usize;

    /// Evaluate one genome. Must be a pure function of `genes`.
    fn evaluate(&self, genes: &[f64]) -> Result<ObjectiveVector, Self::Error>;

    /// Indices of genes that make `genes` infeasible; empty when feasible.
    fn infeasible_genes(&self, _genes: &[f64]) -> Vec<usize> {
        Vec::new()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Nsga2Params {
    pub population_size: usize,
    pub generations: usize,
    pub crossover_rate: f64,
    /// Per-gene mutation probability; `None` means `1 / genome length`.
    pub mutation_rate: Option<f64>,
    pub eta_c: f64,
    pub eta_m: f64,
    pub seed: u64,
}

impl Default for Nsga2Params {
    fn default() -> Self {
        Nsga2Params {
            population_size: 50,
            generations: 100,
            crossover_rate: 0.8,
            mutation_rate: None,
            eta_c: 20.0,
            eta_m: 20.0,
            seed: 0,
        }
    }
}

/// Per-objective best (minimum) and mean over the parent population.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerationStats {
    pub generation: usize,
    pub best: Vec<f64>,
    pub mean: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct EvolveOutcome {
    /// First nondominated layer of the final parents plus offspring.
    pub front: Vec<Individual>,
    /// Final parent population with ranks and crowding distances.
    pub population: Vec<Individual>,
    /// Generation 0 is the random initial population.
    pub history: Vec<GenerationStats>,
    pub evaluations: usize,
}

const STREAM_INIT: u64 = 1;
const STREAM_REPAIR: u64 = 2;
const STREAM_TOURNAMENT: u64 = 3;
const STREAM_CROSSOVER: u64 = 4;
const STREAM_MUTATION: u64 = 5;

fn stream(seed: u64, purpose: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(purpose);
    rng
}

struct Streams {
    init: ChaCha8Rng,
    repair: ChaCha8Rng,
    tournament: ChaCha8Rng,
    crossover: ChaCha8Rng,
    mutation: ChaCha8Rng,
}

/// Run NSGA-II: combine parents and offspring, sort into fronts, fill the
/// next parent set with whole fronts, truncate the split front by crowding
/// distance, then breed offspring by binary tournament, SBX and polynomial
/// mutation.
pub fn evolve<P: Problem>(problem: &P, params: &Nsga2Params) -> Result<EvolveOutcome, EvolveError> {
    let specs = problem.gene_specs();
    validate(specs, params)?;
    let mutation_rate = params.mutation_rate.unwrap_or(1.0 / specs.len() as f64);
    let mut rng = Streams {
        init: stream(params.seed, STREAM_INIT),
        repair: stream(params.seed, STREAM_REPAIR),
        tournament: stream(params.seed, STREAM_TOURNAMENT),
        crossover: stream(params.seed, STREAM_CROSSOVER),
        mutation: stream(params.seed, STREAM_MUTATION),
    };

    let mut genomes = Vec::with_capacity(params.population_size);
    for _ in 0..params.population_size {
        let mut genes: Vec<f64> = specs.iter().map(|s| s.sample(&mut rng.init)).collect();
        repair(problem, &mut genes, &mut rng.repair, 0)?;
        genomes.push(genes);
    }
    let mut parents = evaluate_all(problem, genomes, 0)?;
    let mut evaluations = parents.len();
    let mut offspring: Vec<Individual> = Vec::new();
    rank_in_place(&mut parents)?;
    let mut history = vec![stats(&parents, 0, problem.objective_count())];

    for generation in 1..=params.generations {
        let mut combined = std::mem::take(&mut parents);
        combined.append(&mut offspring);
        parents = select_survivors(combined, params.population_size)?;
        let children = breed(problem, &parents, params, mutation_rate, &mut rng, generation)?;
        offspring = evaluate_all(problem, children, generation)?;
        evaluations += offspring.len();
        history.push(stats(&parents, generation, problem.objective_count()));
    }

    let mut combined = parents.clone();
    combined.extend(offspring);
    let objectives: Vec<ObjectiveVector> = combined.iter().map(|i| i.objectives.clone()).collect();
    let fronts = fast_nondominated_sort(&objectives)?;
    let first = fronts.first().to_vec();
    let refs: Vec<&ObjectiveVector> = first.iter().map(|&i| &objectives[i]).collect();
    let distances = crowding_distance(&refs);
    let front = first
        .iter()
        .zip(distances)
        .map(|(&i, d)| {
            let mut ind = combined[i].clone();
            ind.rank = 1;
            ind.crowding = d;
            ind
        })
        .collect();

    Ok(EvolveOutcome {
        front,
        population: parents,
        history,
        evaluations,
    })
}

fn validate(specs: &[GeneSpec], params: &Nsga2Params) -> Result<(), EvolveError> {
    if specs.is_empty() {
        return Err(EvolveError::InvalidParams("problem has no genes".into()));
    }
    if let Some(k) = specs.iter().position(|s| !s.is_valid()) {
        return Err(EvolveError::InvalidParams(format!("gene {k} has invalid bounds")));
    }
    if params.population_size < 2 {
        return Err(EvolveError::InvalidParams(
            "population size must be at least 2".into(),
        ));
    }
    let rate_ok = |r: f64| (0.0..=1.0).contains(&r);
    if !rate_ok(params.crossover_rate) || !params.mutation_rate.map_or(true, rate_ok) {
        return Err(EvolveError::InvalidParams("rates must lie in [0, 1]".into()));
    }
    if !(params.eta_c >= 0.0 && params.eta_m >= 0.0) {
        return Err(EvolveError::InvalidParams(
            "distribution indices must be non-negative".into(),
        ));
    }
    Ok(())
}

/// Resample offending genes (at most 100 rounds), then whole genomes.
fn repair<P: Problem>(
    problem: &P,
    genes: &mut [f64],
    rng: &mut ChaCha8Rng,
    generation: usize,
) -> Result<(), EvolveError> {
    let specs = problem.gene_specs();
    for _ in 0..100 {
        let bad = problem.infeasible_genes(genes);
        if bad.is_empty() {
            return Ok(());
        }
        for k in bad {
            genes[k] = specs[k].sample(rng);
        }
    }
    for _ in 0..100 {
        for (g, s) in genes.iter_mut().zip(specs) {
            *g = s.sample(rng);
        }
        if problem.infeasible_genes(genes).is_empty() {
            return Ok(());
        }
    }
    Err(EvolveError::Infeasible { generation })
}

fn evaluate_all<P: Problem>(
    problem: &P,
    genomes: Vec<Vec<f64>>,
    generation: usize,
) -> Result<Vec<Individual>, EvolveError> {
    let results: Vec<Result<ObjectiveVector, String>> = genomes
        .par_iter()
        .map(|g| problem.evaluate(g).map_err(|e| e.to_string()))
        .collect();
    genomes
        .into_iter()
        .zip(results)
        .enumerate()
        .map(|(individual, (genes, result))| {
            let objectives = result.map_err(|message| EvolveError::Evaluation {
                generation,
                individual,
                message,
            })?;
            if objectives.len() != problem.objective_count() {
                return Err(EvolveError::Evaluation {
                    generation,
                    individual,
                    message: format!(
                        "expected {} objectives, got {}",
                        problem.objective_count(),
                        objectives.len()
                    ),
                });
            }
            let feasible = problem.infeasible_genes(&genes).is_empty();
            debug_assert!(feasible, "variation produced an infeasible genome");
            Ok(Individual {
                genes,
                objectives,
                rank: 0,
                crowding: 0.0,
                feasible,
            })
        })
        .collect()
}

/// Assign ranks and per-front crowding distances.
fn rank_in_place(pop: &mut [Individual]) -> Result<(), EvolveError> {
    let objectives: Vec<ObjectiveVector> = pop.iter().map(|i| i.objectives.clone()).collect();
    let fronts = fast_nondominated_sort(&objectives)?;
    for (l, layer) in fronts.layers().iter().enumerate() {
        let refs: Vec<&ObjectiveVector> = layer.iter().map(|&i| &objectives[i]).collect();
        for (&i, d) in layer.iter().zip(crowding_distance(&refs)) {
            pop[i].rank = l + 1;
            pop[i].crowding = d;
        }
    }
    Ok(())
}

fn select_survivors(
    mut combined: Vec<Individual>,
    size: usize,
) -> Result<Vec<Individual>, EvolveError> {
    let objectives: Vec<ObjectiveVector> = combined.iter().map(|i| i.objectives.clone()).collect();
    let fronts = fast_nondominated_sort(&objectives)?;
    let mut chosen: Vec<usize> = Vec::with_capacity(size);
    for (l, layer) in fronts.layers().iter().enumerate() {
        if chosen.len() >= size {
            break;
        }
        let refs: Vec<&ObjectiveVector> = layer.iter().map(|&i| &objectives[i]).collect();
        let distances = crowding_distance(&refs);
        for (&i, &d) in layer.iter().zip(&distances) {
            combined[i].rank = l + 1;
            combined[i].crowding = d;
        }
        if chosen.len() + layer.len() <= size {
            chosen.extend(layer);
        } else {
            // Same rank throughout, so the crowded comparison reduces to
            // larger distance first; the stable sort keeps ties in layer order.
            let mut order: Vec<usize> = (0..layer.len()).collect();
            order.sort_by(|&a, &b| distances[b].total_cmp(&distances[a]));
            let room = size - chosen.len();
            chosen.extend(order.into_iter().take(room).map(|k| layer[k]));
        }
    }
    let mut slots: Vec<Option<Individual>> = combined.into_iter().map(Some).collect();
    Ok(chosen
        .into_iter()
        .map(|i| slots[i].take().expect("survivor chosen twice"))
        .collect())
}

fn breed<P: Problem>(
    problem: &P,
    parents: &[Individual],
    params: &Nsga2Params,
    mutation_rate: f64,
    rng: &mut Streams,
    generation: usize,
) -> Result<Vec<Vec<f64>>, EvolveError> {
    let specs = problem.gene_specs();
    let n = parents.len();
    let tournament = |rng: &mut ChaCha8Rng| -> usize {
        let a = rng.gen_range(0..n);
        let mut b = rng.gen_range(0..n - 1);
        if b >= a {
            b += 1;
        }
        let pa = &parents[a];
        let pb = &parents[b];
        match crowded_compare((pa.rank, pa.crowding), (pb.rank, pb.crowding), rng) {
            Winner::First => a,
            Winner::Second => b,
        }
    };

    let mut children = Vec::with_capacity(params.population_size + 1);
    while children.len() < params.population_size {
        let a = tournament(&mut rng.tournament);
        let b = tournament(&mut rng.tournament);
        let (c1, c2) = sbx_crossover(
            &parents[a].genes,
            &parents[b].genes,
            specs,
            params.eta_c,
            params.crossover_rate,
            &mut rng.crossover,
        );
        for child in [c1, c2] {
            let mut child =
                polynomial_mutation(&child, specs, params.eta_m, mutation_rate, &mut rng.mutation);
            repair(problem, &mut child, &mut rng.repair, generation)?;
            children.push(child);
        }
    }
    children.truncate(params.population_size);
    Ok(children)
}

fn stats(pop: &[Individual], generation: usize, objectives: usize) -> GenerationStats {
    let mut best = vec![f64::INFINITY; objectives];
    let mut mean = vec![0.0; objectives];
    for ind in pop {
        for (m, &v) in ind.objectives.values().iter().enumerate() {
            best[m] = best[m].min(v);
            mean[m] += v;
        }
    }
    for v in &mut mean {
        *v /= pop.len().max(1) as f64;
    }
    GenerationStats {
        generation,
        best,
        mean,
    }
}
