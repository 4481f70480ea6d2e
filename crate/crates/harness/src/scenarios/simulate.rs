//! Seeded prediction-trace campaigns: for each seed, one sequence drawn
//! from the truth entry, traced under both the MDL and mixture predictors.

use rayon::prelude::*;

use predlab_core::measures::sample_sequence;
use predlab_core::predictors::{trace, PredictorKind};

use crate::config::ScenarioConfig;
use crate::scenarios::{class_for, write_trace};
use crate::summary::{RunSummary, SeedMetrics};

/// Trailing window length for convergence metrics.
pub const FINAL_WINDOW: usize = 500;

pub fn run(config: &ScenarioConfig) -> Result<RunSummary, String> {
    let class = class_for(config)?;
    let truth = config.truth.expect("validated");
    let entry = class
        .entry(truth)
        .map_err(|e| format!("truth: {e}"))?
        .clone();
    if !entry.spec.is_measure() {
        return Err("truth: must be a measure entry".into());
    }
    let gamma = config.gamma;
    let n = config.n;
    let out = config.out.clone();

    let per_seed: Vec<SeedMetrics> = config
        .seeds
        .par_iter()
        .map(|&seed| -> Result<SeedMetrics, String> {
            let omega = sample_sequence(&entry.spec, n, seed)
                .map_err(|e| format!("simulate seed {seed}: {e}"))?;
            let mdl = trace(PredictorKind::Mdl { gamma }, truth, &class, &omega)
                .map_err(|e| format!("simulate seed {seed}: {e}"))?;
            let mix = trace(PredictorKind::Mixture, truth, &class, &omega)
                .map_err(|e| format!("simulate seed {seed}: {e}"))?;
            write_trace(&out.join(format!("trace_mdl_{seed}.csv")), &mdl)?;
            write_trace(&out.join(format!("trace_mixture_{seed}.csv")), &mix)?;

            let window = FINAL_WINDOW.min(n);
            let start = n - window;
            let mut mdl_dev: f64 = 0.0;
            let mut mix_dev: f64 = 0.0;
            let mut truth_hits = 0usize;
            for i in start..n {
                let m = &mdl.steps[i];
                mdl_dev = mdl_dev.max((m.pred_cond0 - m.truth_cond0).abs());
                let x = &mix.steps[i];
                mix_dev = mix_dev.max((x.pred_cond0 - x.truth_cond0).abs());
                if m.selected_id == Some(truth) {
                    truth_hits += 1;
                }
            }
            Ok(SeedMetrics::new(
                seed,
                &[
                    ("mdl_total", mdl.total_sq_err()),
                    ("mixture_total", mix.total_sq_err()),
                    ("mdl_max_abs_dev_window", mdl_dev),
                    ("mixture_max_abs_dev_window", mix_dev),
                    ("mdl_truth_share_window", truth_hits as f64 / window as f64),
                ],
            ))
        })
        .collect::<Result<_, _>>()?;

    let mut summary = RunSummary::new(config, per_seed, true);
    summary.aggregate_metric("mdl_total");
    summary.aggregate_metric("mixture_total");
    summary.aggregate_metric("mdl_max_abs_dev_window");
    summary.aggregate_metric("mdl_truth_share_window");
    summary.put("window", FINAL_WINDOW.min(n) as f64);
    Ok(summary)
}
