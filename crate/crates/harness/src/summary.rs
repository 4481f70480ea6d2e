//! Run summaries: config echo, per-seed metrics, and aggregates. Every
//! number here is recomputable from the emitted CSVs; wall time goes to
//! stderr only so summaries stay byte-identical across runs.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::config::ScenarioConfig;

#[derive(Debug, Clone, Serialize)]
pub struct SeedMetrics {
    pub seed: u64,
    pub metrics: BTreeMap<String, f64>,
}

impl SeedMetrics {
    pub fn new(seed: u64, pairs: &[(&str, f64)]) -> SeedMetrics {
        SeedMetrics {
            seed,
            metrics: pairs
                .iter()
                .map(|&(k, v)| (k.to_string(), v))
                .collect(),
        }
    }

    pub fn get(&self, key: &str) -> f64 {
        self.metrics.get(key).copied().unwrap_or(f64::NAN)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub config: ScenarioConfig,
    pub tool_version: String,
    pub per_seed: Vec<SeedMetrics>,
    pub aggregate: BTreeMap<String, f64>,
    /// False when any bound check in the run failed.
    pub pass: bool,
}

impl RunSummary {
    pub fn new(config: &ScenarioConfig, per_seed: Vec<SeedMetrics>, pass: bool) -> RunSummary {
        RunSummary {
            config: config.clone(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            per_seed,
            aggregate: BTreeMap::new(),
            pass,
        }
    }

    pub fn put(&mut self, key: &str, value: f64) {
        self.aggregate.insert(key.to_string(), value);
    }

    /// Inserts mean and max of a per-seed metric under `<key>_mean` and
    /// `<key>_max`.
    pub fn aggregate_metric(&mut self, key: &str) {
        let values: Vec<f64> = self.per_seed.iter().map(|s| s.get(key)).collect();
        if values.is_empty() {
            return;
        }
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        self.put(&format!("{key}_mean"), mean);
        self.put(&format!("{key}_max"), max);
    }
}
