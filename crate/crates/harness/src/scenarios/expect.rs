//! Exact expected squared-error sums, enumerated over the full binary tree
//! to the configured depth for the MDL, mixture, and self predictors.

use predlab_core::analysis::expected_sq_error;
use predlab_core::predictors::PredictorKind;

use crate::config::ScenarioConfig;
use crate::output::{cell_f64, write_csv};
use crate::summary::RunSummary;

pub fn run(config: &ScenarioConfig) -> Result<RunSummary, String> {
    let class = super::class_for(config)?;
    let truth = config.truth.expect("validated");
    let kinds = [
        ("mdl", PredictorKind::Mdl {
            gamma: config.gamma,
        }),
        ("mixture", PredictorKind::Mixture),
        ("single", PredictorKind::Single { entry: truth }),
    ];

    let mut rows = Vec::new();
    let mut finals = Vec::new();
    let mut mdl_increments = Vec::new();
    for (name, kind) in kinds {
        let mut prev = 0.0;
        let mut value = 0.0;
        for depth in 0..=config.depth {
            value = expected_sq_error(&class, truth, kind, depth)
                .map_err(|e| format!("expect {name} depth {depth}: {e}"))?;
            let increment = value - prev;
            rows.push(vec![
                name.to_string(),
                depth.to_string(),
                cell_f64(value),
                cell_f64(increment),
            ]);
            if name == "mdl" && depth > 0 {
                mdl_increments.push(increment);
            }
            prev = value;
        }
        finals.push((name, value));
    }
    write_csv(
        config.out.join("expect.csv"),
        &["predictor", "depth", "value", "increment"],
        rows,
    )?;

    let mut summary = RunSummary::new(config, Vec::new(), true);
    for (name, value) in finals {
        summary.put(&format!("{name}_final"), value);
        summary.put(&format!("{name}_finite"), f64::from(u8::from(value.is_finite())));
    }
    // Tail contraction indicator: every increment past depth 10 smaller
    // than the depth-10 increment. Only meaningful when the run is deep
    // enough to have a tail.
    if config.depth >= 11 {
        let at10 = mdl_increments[9];
        let tail_ok = mdl_increments[10..].iter().all(|&inc| inc < at10);
        summary.put("mdl_tail_increments_below_depth10", f64::from(u8::from(tail_ok)));
        summary.put("mdl_increment_at_depth10", at10);
    }
    Ok(summary)
}
