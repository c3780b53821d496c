//! Run configuration: one JSON document with `structure`, `scenario`,
//! `link_model`, `nsga2` and `baseline` sections. Every field has a default,
//! so `{}` plus a structure is a complete optimization config.

use std::path::Path;

use cislunar_core::aoi::LinkModel;
use cislunar_core::scenario::{ConstellationConfig, ScenarioParams, WALKER_DELTA_INCLINATION_DEG};
use cislunar_nsga2::Nsga2Params;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};
use crate::manifest::RunManifest;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerSection {
    /// Defaults to 100 for three or more ordinary satellites, else 50.
    pub population_size: Option<usize>,
    pub generations: usize,
    pub crossover_rate: f64,
    pub mutation_rate: Option<f64>,
    pub eta_c: f64,
    pub eta_m: f64,
}

impl Default for OptimizerSection {
    fn default() -> Self {
        let d = Nsga2Params::default();
        OptimizerSection {
            population_size: None,
            generations: d.generations,
            crossover_rate: d.crossover_rate,
            mutation_rate: d.mutation_rate,
            eta_c: d.eta_c,
            eta_m: d.eta_m,
        }
    }
}

pub fn default_population(structure: &ConstellationConfig) -> usize {
    if structure.n_ord >= 3 {
        100
    } else {
        50
    }
}

impl OptimizerSection {
    pub fn params(&self, structure: &ConstellationConfig, seed: u64) -> Nsga2Params {
        Nsga2Params {
            population_size: self
                .population_size
                .unwrap_or_else(|| default_population(structure)),
            generations: self.generations,
            crossover_rate: self.crossover_rate,
            mutation_rate: self.mutation_rate,
            eta_c: self.eta_c,
            eta_m: self.eta_m,
            seed,
        }
    }
}

/// Grid swept by the Walker baselines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineSection {
    /// Semi-major axes; the scenario's axis catalog when absent.
    pub axes_km: Option<Vec<f64>>,
    /// Inclinations tried for the Delta family.
    pub delta_inclinations_deg: Vec<f64>,
}

impl Default for BaselineSection {
    fn default() -> Self {
        BaselineSection {
            axes_km: None,
            delta_inclinations_deg: vec![WALKER_DELTA_INCLINATION_DEG],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub structure: Option<ConstellationConfig>,
    pub scenario: ScenarioParams,
    pub link_model: LinkModel,
    pub nsga2: OptimizerSection,
    pub baseline: BaselineSection,
}

/// A parsed config file, plus the seed when the file was a run manifest.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub manifest_seed: Option<u64>,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(s) = &self.structure {
            s.validate().map_err(|e| CliError::invalid("structure", e))?;
        }
        self.scenario
            .validate()
            .map_err(|e| CliError::invalid("scenario", e))?;
        self.link_model
            .validate()
            .map_err(|e| CliError::invalid("link_model", e))?;
        if let Some(p) = self.nsga2.population_size {
            if p < 2 {
                return Err(CliError::Validation(format!(
                    "nsga2.population_size: {p} is below the minimum of 2"
                )));
            }
        }
        if let Some(axes) = &self.baseline.axes_km {
            if axes.is_empty() {
                return Err(CliError::Validation("baseline.axes_km: empty grid".into()));
            }
        }
        if self.baseline.delta_inclinations_deg.is_empty() {
            return Err(CliError::Validation(
                "baseline.delta_inclinations_deg: empty grid".into(),
            ));
        }
        Ok(())
    }

    pub fn require_structure(&self) -> Result<ConstellationConfig> {
        self.structure
            .ok_or_else(|| CliError::Validation("structure: section is required".into()))
    }

    /// Copy with every optional default made explicit.
    pub fn resolved(&self) -> RunConfig {
        let mut out = self.clone();
        if let (Some(s), None) = (&self.structure, self.nsga2.population_size) {
            out.nsga2.population_size = Some(default_population(s));
        }
        out
    }

    /// SHA-256 of the resolved configuration's canonical JSON.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(&self.resolved()).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }

    pub fn from_json(text: &str) -> Result<LoadedConfig> {
        let value: serde_json::Value = serde_json::from_str(text)
            .map_err(|e| CliError::Validation(format!("config: {e}")))?;
        let loaded = if value.get("config_hash").is_some() {
            let m: RunManifest = serde_json::from_value(value)
                .map_err(|e| CliError::Validation(format!("manifest: {e}")))?;
            LoadedConfig {
                config: m.config,
                manifest_seed: m.seed,
            }
        } else {
            // Parse from text rather than the value to keep line numbers.
            let config: RunConfig = serde_json::from_str(text)
                .map_err(|e| CliError::Validation(format!("config: {e}")))?;
            LoadedConfig {
                config,
                manifest_seed: None,
            }
        };
        loaded.config.validate()?;
        Ok(loaded)
    }

    pub fn load(path: &Path) -> Result<LoadedConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            CliError::Validation(m) => CliError::Validation(format!("{}: {m}", path.display())),
            other => other,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_the_reference_setup() {
        let c = RunConfig::from_json("{}").unwrap().config;
        assert_eq!(c, RunConfig::default());
        assert_eq!(c.scenario.sample_count(), 711);
        assert_eq!(c.scenario.points, 100);
    }

    #[test]
    fn population_default_depends_on_ordinary_count() {
        let c = RunConfig::from_json(r#"{"structure": {"n_geo": 1, "n_l1": 1, "n_ord": 3, "n_l2": 1}}"#)
            .unwrap()
            .config;
        assert_eq!(c.resolved().nsga2.population_size, Some(100));
        let s = ConstellationConfig::new(2, 1, 2, 1).unwrap();
        assert_eq!(c.nsga2.params(&s, 7).population_size, 50);
    }

    #[test]
    fn bound_violations_name_the_field() {
        let e = RunConfig::from_json(r#"{"structure": {"n_geo": 1, "n_l1": 3, "n_ord": 1, "n_l2": 1}}"#)
            .unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().contains("n_l1"), "{e}");
    }

    #[test]
    fn unknown_fields_report_a_line() {
        let e = RunConfig::from_json("{\n  \"scenario\": {\n    \"pointz\": 3\n  }\n}").unwrap_err();
        assert!(e.to_string().contains("line 3"), "{e}");
    }

    #[test]
    fn hash_ignores_formatting_but_not_values() {
        let a = RunConfig::from_json("{}").unwrap().config;
        let b = RunConfig::from_json("{ \"nsga2\": { \"generations\": 100 } }").unwrap().config;
        let c = RunConfig::from_json("{ \"nsga2\": { \"generations\": 99 } }").unwrap().config;
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
    }
}
