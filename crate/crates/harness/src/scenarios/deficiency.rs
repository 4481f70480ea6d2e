//! Randomness-deficiency profiles along seeded sequences, with a tail
//! histogram checking the 2^-d shell bound within sampling error.

use rayon::prelude::*;

use predlab_core::analysis::shell_check;
use predlab_core::measures::sample_sequence;
use predlab_core::modelclass::deficiency_profile;

use crate::config::ScenarioConfig;
use crate::output::{cell_bool, cell_f64, write_csv};
use crate::summary::{RunSummary, SeedMetrics};

/// Largest tail threshold in the shell histogram.
const SHELL_MAX: u32 = 8;

pub fn run(config: &ScenarioConfig) -> Result<RunSummary, String> {
    let class = super::class_for(config)?;
    let truth = config.truth.expect("validated");
    let entry = class
        .entry(truth)
        .map_err(|e| format!("truth: {e}"))?
        .clone();
    if !entry.spec.is_measure() {
        return Err("truth: must be a measure entry".into());
    }
    let n = config.n;

    let profiles: Vec<(u64, predlab_core::modelclass::DeficiencyReport)> = config
        .seeds
        .par_iter()
        .map(|&seed| -> Result<_, String> {
            let omega = sample_sequence(&entry.spec, n, seed)
                .map_err(|e| format!("deficiency seed {seed}: {e}"))?;
            let report = deficiency_profile(&class, truth, &omega)
                .map_err(|e| format!("deficiency seed {seed}: {e}"))?;
            Ok((seed, report))
        })
        .collect::<Result<_, _>>()?;

    let mut rows = Vec::with_capacity(profiles.len() * (n + 1));
    for (seed, report) in &profiles {
        for (step, d) in report.per_prefix.iter().enumerate() {
            rows.push(vec![seed.to_string(), step.to_string(), cell_f64(*d)]);
        }
    }
    write_csv(
        config.out.join("profiles.csv"),
        &["seed", "step", "deficiency"],
        rows,
    )?;

    let sups: Vec<f64> = profiles.iter().map(|(_, r)| r.sup).collect();
    let shells = shell_check(&sups, SHELL_MAX).map_err(|e| format!("deficiency: {e}"))?;
    let shell_rows = shells.bins.iter().map(|b| {
        vec![
            b.d.to_string(),
            b.count.to_string(),
            cell_f64(b.frequency),
            cell_f64(b.mass_bound),
            cell_f64(b.limit),
            cell_bool(b.ok),
        ]
    });
    write_csv(
        config.out.join("shells.csv"),
        &["d", "count", "frequency", "mass_bound", "limit", "ok"],
        shell_rows,
    )?;

    let concentration = f64::from(entry.code_length) + 3.0;
    let per_seed: Vec<SeedMetrics> = profiles
        .iter()
        .map(|(seed, r)| {
            SeedMetrics::new(
                *seed,
                &[
                    ("sup", r.sup),
                    ("sup_at", r.sup_at as f64),
                    ("final", *r.per_prefix.last().expect("n >= 1")),
                ],
            )
        })
        .collect();
    let within = sups.iter().filter(|&&s| s <= concentration).count();
    let mut summary = RunSummary::new(config, per_seed, shells.pass);
    summary.aggregate_metric("sup");
    summary.put("share_sup_within_code_length_plus_3", within as f64 / sups.len() as f64);
    summary.put("shell_pass", f64::from(u8::from(shells.pass)));
    Ok(summary)
}
