use serde::{Deserialize, Serialize};

use crate::config::RunConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryRow {
    pub generation: usize,
    pub best_aoi: f64,
    pub best_cov: f64,
    pub mean_aoi: f64,
    pub mean_cov: f64,
}

/// Everything needed to repeat a run: the resolved configuration and seed.
/// Passing a manifest as `--config` re-runs it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub command: String,
    pub config_hash: String,
    pub seed: Option<u64>,
    pub started_at: String,
    pub finished_at: String,
    pub evaluations: Option<usize>,
    /// Command-line arguments beyond the config file.
    #[serde(default)]
    pub arguments: serde_json::Value,
    pub config: RunConfig,
    #[serde(default)]
    pub history: Vec<HistoryRow>,
}
