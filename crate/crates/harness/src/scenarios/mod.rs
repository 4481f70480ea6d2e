//! Scenario orchestration: class loading, dispatch, and shared trace
//! persistence.

use std::path::Path;

use predlab_core::modelclass::{ClassEntry, ModelClass};
use predlab_core::predictors::PredictionTrace;

use crate::config::{ScenarioConfig, ScenarioKind};
use crate::output::{cell_f64, cell_opt_f64, cell_opt_usize, write_csv};
use crate::summary::RunSummary;

pub mod bounds;
pub mod deficiency;
pub mod expect;
pub mod hm_demo;
pub mod lemmas;
pub mod simulate;

/// Loads and validates a model class file: a JSON list of entries whose
/// ids are their positions in the file.
pub fn load_class(path: &Path) -> Result<ModelClass, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("class {}: {e}", path.display()))?;
    let entries: Vec<ClassEntry> =
        serde_json::from_str(&text).map_err(|e| format!("class {}: {e}", path.display()))?;
    ModelClass::new(entries).map_err(|e| format!("class {}: {e}", path.display()))
}

fn class_for(config: &ScenarioConfig) -> Result<ModelClass, String> {
    let path = config
        .class
        .as_ref()
        .ok_or_else(|| "class: required for this scenario".to_string())?;
    load_class(path)
}

/// Executes the configured scenario and returns its summary; files land
/// under `config.out`.
pub fn run_scenario(config: &ScenarioConfig) -> Result<RunSummary, String> {
    std::fs::create_dir_all(&config.out)
        .map_err(|e| format!("out {}: {e}", config.out.display()))?;
    match config.scenario {
        ScenarioKind::Lemmas => lemmas::run(config),
        ScenarioKind::Simulate => simulate::run(config),
        ScenarioKind::Expect => expect::run(config),
        ScenarioKind::HmDemo => hm_demo::run(config),
        ScenarioKind::Deficiency => deficiency::run(config),
        ScenarioKind::Bounds => bounds::run(config),
    }
}

pub const TRACE_HEADER: [&str; 6] = [
    "step",
    "truth_cond0",
    "pred_cond0",
    "sq_err",
    "selected_id",
    "selected_score",
];

/// Writes one prediction trace in the fixed column order.
pub fn write_trace(path: &Path, trace: &PredictionTrace) -> Result<(), String> {
    let rows = trace.steps.iter().map(|s| {
        vec![
            s.step.to_string(),
            cell_f64(s.truth_cond0),
            cell_f64(s.pred_cond0),
            cell_f64(s.sq_err),
            cell_opt_usize(s.selected_id),
            cell_opt_f64(s.selected_score),
        ]
    });
    write_csv(path, &TRACE_HEADER, rows)
}
