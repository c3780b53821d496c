use std::cmp::Ordering;
use std::path::Path;

use cislunar_core::scenario::{
    walker_constellation, ConstellationConfig, Evaluator, ScenarioProblem, WalkerFamily,
    WALKER_STAR_INCLINATION_DEG,
};
use cislunar_nsga2::{evolve, Individual};
use log::{info, warn};
use serde::Serialize;

use crate::config::{LoadedConfig, RunConfig};
use crate::error::{CliError, Result};
use crate::io::{csv_bytes, fmt_f64, gene_columns, genome_fields, read_genome, write_atomic};
use crate::manifest::{HistoryRow, RunManifest};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

fn evaluator(config: &RunConfig) -> Result<Evaluator> {
    Evaluator::new(config.scenario.clone(), config.link_model)
        .map_err(|e| CliError::invalid("scenario", e))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrontRow {
    pub aoi: f64,
    pub cov: f64,
    pub genes: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Optimization {
    pub front: Vec<FrontRow>,
    pub history: Vec<HistoryRow>,
    pub evaluations: usize,
}

fn lexicographic(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Front sorted by increasing age (then decreasing coverage), with repeated
/// genomes dropped.
fn front_rows(front: &[Individual]) -> Vec<FrontRow> {
    let mut rows: Vec<FrontRow> = front
        .iter()
        .map(|ind| FrontRow {
            aoi: ind.objectives.0[0],
            cov: -ind.objectives.0[1],
            genes: ind.genes.clone(),
        })
        .collect();
    rows.sort_by(|a, b| {
        a.aoi
            .total_cmp(&b.aoi)
            .then(b.cov.total_cmp(&a.cov))
            .then_with(|| lexicographic(&a.genes, &b.genes))
    });
    rows.dedup_by(|a, b| a.genes == b.genes);
    rows
}

pub fn run_optimization(config: &RunConfig, seed: u64) -> Result<Optimization> {
    let structure = config.require_structure()?;
    let ev = evaluator(config)?;
    let problem = ScenarioProblem::new(&ev, structure).map_err(|e| CliError::invalid("structure", e))?;
    let params = config.nsga2.params(&structure, seed);
    info!(
        "optimizing {structure}: population {}, {} generations, {} samples",
        params.population_size,
        params.generations,
        ev.sample_count()
    );
    let outcome = evolve(&problem, &params)?;
    let history = outcome
        .history
        .iter()
        .map(|g| HistoryRow {
            generation: g.generation,
            best_aoi: g.best[0],
            best_cov: -g.best[1],
            mean_aoi: g.mean[0],
            mean_cov: -g.mean[1],
        })
        .collect();
    Ok(Optimization {
        front: front_rows(&outcome.front),
        history,
        evaluations: outcome.evaluations,
    })
}

pub fn pareto_csv(structure: &ConstellationConfig, front: &[FrontRow]) -> Result<Vec<u8>> {
    let mut header = vec!["individual_id".to_string(), "aoi".into(), "cov".into()];
    header.extend(gene_columns(structure.n_ord));
    let rows: Vec<Vec<String>> = front
        .iter()
        .enumerate()
        .map(|(id, r)| {
            let mut fields = vec![id.to_string(), fmt_f64(r.aoi), fmt_f64(r.cov)];
            fields.extend(genome_fields(&r.genes));
            fields
        })
        .collect();
    csv_bytes(&header, &rows)
}

pub fn history_csv(history: &[HistoryRow]) -> Result<Vec<u8>> {
    let header: Vec<String> = ["generation", "best_aoi", "best_cov", "mean_aoi", "mean_cov"]
        .map(String::from)
        .to_vec();
    let rows: Vec<Vec<String>> = history
        .iter()
        .map(|h| {
            vec![
                h.generation.to_string(),
                fmt_f64(h.best_aoi),
                fmt_f64(h.best_cov),
                fmt_f64(h.mean_aoi),
                fmt_f64(h.mean_cov),
            ]
        })
        .collect();
    csv_bytes(&header, &rows)
}

fn write_manifest(out: &Path, manifest: &RunManifest) -> Result<()> {
    let mut text = serde_json::to_string_pretty(manifest).map_err(CliError::runtime)?;
    text.push('\n');
    write_atomic(&out.join("manifest.json"), text.as_bytes())
}

fn resolve_seed(loaded: &LoadedConfig, seed: Option<u64>) -> Result<u64> {
    seed.or(loaded.manifest_seed)
        .ok_or_else(|| CliError::Validation("--seed is required unless the config is a run manifest".into()))
}

fn optimize_into(config: &RunConfig, seed: u64, out: &Path) -> Result<Optimization> {
    let structure = config.require_structure()?;
    let started_at = now();
    let run = run_optimization(config, seed)?;
    write_atomic(&out.join("pareto.csv"), &pareto_csv(&structure, &run.front)?)?;
    write_atomic(&out.join("history.csv"), &history_csv(&run.history)?)?;
    write_manifest(
        out,
        &RunManifest {
            tool_version: TOOL_VERSION.into(),
            command: "optimize".into(),
            config_hash: config.hash(),
            seed: Some(seed),
            started_at,
            finished_at: now(),
            evaluations: Some(run.evaluations),
            arguments: serde_json::json!({ "seed": seed }),
            config: config.resolved(),
            history: run.history.clone(),
        },
    )?;
    info!("{structure}: {} front members written to {}", run.front.len(), out.display());
    Ok(run)
}

pub fn optimize(config_path: &Path, seed: Option<u64>, out: &Path) -> Result<()> {
    let loaded = RunConfig::load(config_path)?;
    let seed = resolve_seed(&loaded, seed)?;
    loaded.config.require_structure()?;
    optimize_into(&loaded.config, seed, out).map(|_| ())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvaluationReport {
    pub aoi: f64,
    pub cov: f64,
}

pub fn evaluate(config_path: &Path, genome_path: &Path, row: Option<usize>) -> Result<EvaluationReport> {
    let loaded = RunConfig::load(config_path)?;
    let structure = loaded.config.require_structure()?;
    let genome = read_genome(genome_path, row)?;
    if genome.len() != structure.genome_len() {
        return Err(CliError::Validation(format!(
            "genome has {} genes but {structure} needs {}",
            genome.len(),
            structure.genome_len()
        )));
    }
    let ev = evaluator(&loaded.config)?;
    let o = ev
        .evaluate(&structure, &genome)
        .map_err(|e| CliError::invalid("genome", e))?;
    Ok(EvaluationReport { aoi: o.aoi, cov: o.cov })
}

/// One structure per line, as `1,1,3,1` or `{1,1,3,1}`; `#` starts a comment.
pub fn parse_structures(text: &str) -> Result<Vec<ConstellationConfig>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |m: String| CliError::Validation(format!("structures line {}: {m}", n + 1));
        let body = line.trim_start_matches('{').trim_end_matches('}');
        let counts: Vec<u32> = body
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<u32>().map_err(|_| bad(format!("'{s}' is not a count"))))
            .collect::<Result<_>>()?;
        let [g, l1, o, l2] = counts[..] else {
            return Err(bad(format!("expected 4 counts, found {}", counts.len())));
        };
        out.push(ConstellationConfig::new(g, l1, o, l2).map_err(|e| bad(e.to_string()))?);
    }
    if out.is_empty() {
        return Err(CliError::Validation("structures file lists no structures".into()));
    }
    Ok(out)
}

pub fn structure_dir_name(s: &ConstellationConfig) -> String {
    format!("{}_{}_{}_{}", s.n_geo, s.n_l1, s.n_ord, s.n_l2)
}

#[derive(Debug, Serialize)]
struct SweepEntry {
    structure: String,
    directory: String,
    status: &'static str,
    error: Option<String>,
}

pub fn sweep(structures_path: &Path, config_path: Option<&Path>, seed: u64, out: &Path) -> Result<()> {
    let text = std::fs::read_to_string(structures_path)
        .map_err(|e| CliError::Validation(format!("{}: {e}", structures_path.display())))?;
    let structures = parse_structures(&text)?;
    let base = match config_path {
        Some(p) => RunConfig::load(p)?.config,
        None => RunConfig::default(),
    };
    let mut rows = Vec::new();
    let mut entries = Vec::new();
    let mut worst: Option<CliError> = None;
    for s in &structures {
        let config = RunConfig {
            structure: Some(*s),
            ..base.clone()
        };
        let dir = structure_dir_name(s);
        match optimize_into(&config, seed, &out.join(&dir)) {
            Ok(run) => {
                for (id, r) in run.front.iter().enumerate() {
                    rows.push(vec![
                        s.to_string(),
                        s.n_geo.to_string(),
                        s.n_l1.to_string(),
                        s.n_ord.to_string(),
                        s.n_l2.to_string(),
                        id.to_string(),
                        fmt_f64(r.aoi),
                        fmt_f64(r.cov),
                    ]);
                }
                entries.push(SweepEntry {
                    structure: s.to_string(),
                    directory: dir,
                    status: "ok",
                    error: None,
                });
            }
            Err(e) => {
                warn!("{s} failed: {e}");
                entries.push(SweepEntry {
                    structure: s.to_string(),
                    directory: dir,
                    status: "failed",
                    error: Some(e.to_string()),
                });
                if worst.as_ref().map_or(true, |w| e.exit_code() > w.exit_code()) {
                    worst = Some(e);
                }
            }
        }
    }
    let header: Vec<String> = ["structure", "n_geo", "n_l1", "n_ord", "n_l2", "individual_id", "aoi", "cov"]
        .map(String::from)
        .to_vec();
    write_atomic(&out.join("fronts.csv"), &csv_bytes(&header, &rows)?)?;
    let mut summary = serde_json::to_string_pretty(&entries).map_err(CliError::runtime)?;
    summary.push('\n');
    write_atomic(&out.join("sweep.json"), summary.as_bytes())?;
    match worst {
        None => Ok(()),
        Some(e) => Err(match e {
            CliError::Validation(_) => CliError::Validation(format!("one or more structures failed: {e}")),
            _ => CliError::Runtime(format!("one or more structures failed: {e}")),
        }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BaselineRow {
    pub a_km: f64,
    pub inclination_deg: f64,
    pub aoi: f64,
    pub cov: f64,
    pub unreachable: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BaselineRequest {
    pub n: usize,
    pub family: WalkerFamily,
    pub with_geo: bool,
    /// Replaces the configured Delta inclination grid.
    pub inclination_deg: Option<f64>,
}

/// Evaluate the Walker baseline over the configured axis (and, for Delta,
/// inclination) grid.
pub fn run_baseline(config: &RunConfig, req: &BaselineRequest) -> Result<Vec<BaselineRow>> {
    if req.n == 0 {
        return Err(CliError::Validation("--n must be at least 1".into()));
    }
    let ev = evaluator(config)?;
    let axes = config.baseline.axes_km.clone().unwrap_or_else(|| ev.axes().to_vec());
    let inclinations = match (req.family, req.inclination_deg) {
        (WalkerFamily::Star, _) => vec![WALKER_STAR_INCLINATION_DEG],
        (WalkerFamily::Delta, Some(i)) => vec![i],
        (WalkerFamily::Delta, None) => config.baseline.delta_inclinations_deg.clone(),
    };
    let mut rows = Vec::new();
    for &a in &axes {
        for &inc in &inclinations {
            let c = walker_constellation(req.n, req.family, a, inc, req.with_geo)
                .map_err(|e| CliError::invalid("baseline", e))?;
            let o = ev.evaluate_constellation(&c).map_err(CliError::runtime)?;
            rows.push(BaselineRow {
                a_km: a,
                inclination_deg: inc,
                aoi: o.aoi,
                cov: o.cov,
                unreachable: o.unreachable,
            });
        }
    }
    Ok(rows)
}

pub fn baseline_csv(req: &BaselineRequest, rows: &[BaselineRow]) -> Result<Vec<u8>> {
    let header: Vec<String> = ["family", "with_geo", "n", "a_km", "inclination_deg", "aoi", "cov", "unreachable"]
        .map(String::from)
        .to_vec();
    let family = match req.family {
        WalkerFamily::Star => "star",
        WalkerFamily::Delta => "delta",
    };
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                family.to_string(),
                req.with_geo.to_string(),
                req.n.to_string(),
                fmt_f64(r.a_km),
                fmt_f64(r.inclination_deg),
                fmt_f64(r.aoi),
                fmt_f64(r.cov),
                r.unreachable.to_string(),
            ]
        })
        .collect();
    csv_bytes(&header, &body)
}

pub fn baseline(config_path: Option<&Path>, req: &BaselineRequest, out: &Path) -> Result<Vec<BaselineRow>> {
    let config = match config_path {
        Some(p) => RunConfig::load(p)?.config,
        None => RunConfig::default(),
    };
    let started_at = now();
    let rows = run_baseline(&config, req)?;
    write_atomic(&out.join("baseline.csv"), &baseline_csv(req, &rows)?)?;
    write_manifest(
        out,
        &RunManifest {
            tool_version: TOOL_VERSION.into(),
            command: "baseline".into(),
            config_hash: config.hash(),
            seed: None,
            started_at,
            finished_at: now(),
            evaluations: Some(rows.len()),
            arguments: serde_json::to_value(req).map_err(CliError::runtime)?,
            config: config.resolved(),
            history: Vec::new(),
        },
    )?;
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn structures_file_formats() {
        let s = parse_structures("# N = 5\n{2,1,1,1}\n1, 2, 1, 1 # trailing\n\n1 1 2 1\n").unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s[1], ConstellationConfig::new(1, 2, 1, 1).unwrap());
        assert!(parse_structures("# nothing\n\n").is_err());
        assert!(parse_structures("1,1,1").is_err());
        assert!(parse_structures("1,3,1,1").is_err());
        assert!(parse_structures("1,a,1,1").is_err());
    }

    #[test]
    fn front_rows_sorted_and_unique() {
        let ind = |aoi: f64, cov: f64, g: f64| Individual {
            genes: vec![g],
            objectives: vec![aoi, -cov].into(),
            rank: 1,
            crowding: 0.0,
            feasible: true,
        };
        let rows = front_rows(&[ind(150.0, 0.9, 1.0), ind(140.0, 0.8, 2.0), ind(150.0, 0.9, 1.0)]);
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].aoi, 140.0);
        assert_eq!(rows[1].cov, 0.9);
    }
}
