//! Explicit-constant bound verification campaigns.
//!
//! Chains mode: for every unordered pair of measure entries, seeded
//! sequences are drawn from the pair's first entry and the two-measure
//! inequality chain is verified at each. Sequence mode: the MDL
//! predictor's squared-error sum along seeded sequences is checked against
//! the assembled per-sequence bound, the candidate cutoff, and the
//! selected-entry count cap. The loaded class is pairwise-extended here;
//! selection still runs over the original entries.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use predlab_core::analysis::{per_sequence_bound, vovk_bound_check};
use predlab_core::measures::sample_sequence;
use predlab_core::modelclass::ModelClass;

use crate::config::{BoundsMode, ScenarioConfig};
use crate::output::{cell_bool, cell_f64, write_csv};
use crate::summary::{RunSummary, SeedMetrics};

struct ChainRow {
    seed: u64,
    p_id: usize,
    q_id: usize,
    n: usize,
    sum: f64,
    bound: f64,
    slack: f64,
    pass: bool,
}

fn run_chains(
    class: &ModelClass,
    config: &ScenarioConfig,
) -> Result<(Vec<ChainRow>, Vec<SeedMetrics>), String> {
    let measure_ids: Vec<usize> = (0..class.base_len())
        .filter(|&id| class.entries()[id].spec.is_measure())
        .collect();
    let mut pairs = Vec::new();
    for (a, &i) in measure_ids.iter().enumerate() {
        for &j in &measure_ids[a + 1..] {
            pairs.push((i, j));
        }
    }
    if pairs.is_empty() {
        return Err("bounds: chains mode needs at least two measure entries".into());
    }

    let results: Vec<(SeedMetrics, Vec<ChainRow>)> = config
        .seeds
        .par_iter()
        .map(|&seed| -> Result<_, String> {
            // The per-seed length varies up to n so short and long
            // prefixes are both exercised.
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let len = rng.gen_range(1..=config.n);
            let mut rows = Vec::with_capacity(pairs.len());
            let mut min_slack = f64::INFINITY;
            let mut passed = 0usize;
            for &(p_id, q_id) in &pairs {
                let spec = &class.entries()[p_id].spec;
                let x = sample_sequence(spec, len, seed)
                    .map_err(|e| format!("bounds seed {seed}: {e}"))?;
                let report = vovk_bound_check(class, p_id, q_id, &x)
                    .map_err(|e| format!("bounds seed {seed} pair ({p_id},{q_id}): {e}"))?;
                min_slack = min_slack.min(report.slack);
                passed += usize::from(report.pass);
                rows.push(ChainRow {
                    seed,
                    p_id,
                    q_id,
                    n: len,
                    sum: report.sum,
                    bound: report.bound,
                    slack: report.slack,
                    pass: report.pass,
                });
            }
            let metrics = SeedMetrics::new(
                seed,
                &[
                    ("chains_checked", pairs.len() as f64),
                    ("chains_passed", passed as f64),
                    ("chain_min_slack", min_slack),
                ],
            );
            Ok((metrics, rows))
        })
        .collect::<Result<_, _>>()?;

    let mut metrics = Vec::with_capacity(results.len());
    let mut rows = Vec::new();
    for (m, r) in results {
        metrics.push(m);
        rows.extend(r);
    }
    Ok((rows, metrics))
}

struct SequenceOutcome {
    metrics: SeedMetrics,
    selected_rows: Vec<Vec<String>>,
    pass: bool,
}

fn run_sequences(
    class: &ModelClass,
    config: &ScenarioConfig,
) -> Result<Vec<SequenceOutcome>, String> {
    let truth = config.truth.expect("validated");
    let spec = class
        .entry(truth)
        .map_err(|e| format!("truth: {e}"))?
        .spec
        .clone();
    config
        .seeds
        .par_iter()
        .map(|&seed| -> Result<SequenceOutcome, String> {
            let omega = sample_sequence(&spec, config.n, seed)
                .map_err(|e| format!("bounds seed {seed}: {e}"))?;
            let rep = per_sequence_bound(class, truth, &omega, config.gamma)
                .map_err(|e| format!("bounds seed {seed}: {e}"))?;
            let pass = rep.report.pass && rep.cutoff_holds && rep.count_ok;
            let selected_rows = rep
                .selected
                .iter()
                .map(|s| {
                    vec![
                        seed.to_string(),
                        s.id.to_string(),
                        s.code_length.to_string(),
                        s.last_selected_step.to_string(),
                        cell_f64(s.chain.bound),
                    ]
                })
                .collect();
            let metrics = SeedMetrics::new(
                seed,
                &[
                    ("sum", rep.report.sum),
                    ("bound", rep.report.bound),
                    ("slack", rep.report.slack),
                    ("deficiency_sup", rep.report.deficiency_sup.expect("set")),
                    ("selected_count", rep.selected.len() as f64),
                    ("count_limit", rep.count_limit),
                    ("cutoff_holds", f64::from(u8::from(rep.cutoff_holds))),
                    ("count_ok", f64::from(u8::from(rep.count_ok))),
                    ("pass", f64::from(u8::from(pass))),
                ],
            );
            Ok(SequenceOutcome {
                metrics,
                selected_rows,
                pass,
            })
        })
        .collect::<Result<_, _>>()
}

pub fn run(config: &ScenarioConfig) -> Result<RunSummary, String> {
    let class = super::class_for(config)?
        .with_pairwise_averages()
        .map_err(|e| format!("class: {e}"))?;
    let mut pass = true;
    let mut per_seed = Vec::new();
    let mut summary_extra: Vec<(String, f64)> = Vec::new();

    if config.mode != BoundsMode::Sequence {
        let (rows, metrics) = run_chains(&class, config)?;
        let header = ["seed", "p_id", "q_id", "n", "sum", "bound", "slack", "pass"];
        let csv_rows = rows.iter().map(|r| {
            vec![
                r.seed.to_string(),
                r.p_id.to_string(),
                r.q_id.to_string(),
                r.n.to_string(),
                cell_f64(r.sum),
                cell_f64(r.bound),
                cell_f64(r.slack),
                cell_bool(r.pass),
            ]
        });
        write_csv(config.out.join("chain_checks.csv"), &header, csv_rows)?;
        let failures = rows.iter().filter(|r| !r.pass).count();
        let min_slack = rows.iter().map(|r| r.slack).fold(f64::INFINITY, f64::min);
        pass &= failures == 0;
        summary_extra.push(("chain_checks".into(), rows.len() as f64));
        summary_extra.push(("chain_failures".into(), failures as f64));
        summary_extra.push(("chain_min_slack".into(), min_slack));
        if config.mode == BoundsMode::Chains {
            per_seed = metrics;
        }
    }

    if config.mode != BoundsMode::Chains {
        let outcomes = run_sequences(&class, config)?;
        let header = [
            "seed",
            "n",
            "sum",
            "bound",
            "slack",
            "deficiency_sup",
            "selected_count",
            "count_limit",
            "cutoff_holds",
            "pass",
        ];
        let csv_rows = outcomes.iter().map(|o| {
            vec![
                o.metrics.seed.to_string(),
                config.n.to_string(),
                cell_f64(o.metrics.get("sum")),
                cell_f64(o.metrics.get("bound")),
                cell_f64(o.metrics.get("slack")),
                cell_f64(o.metrics.get("deficiency_sup")),
                cell_f64(o.metrics.get("selected_count")),
                cell_f64(o.metrics.get("count_limit")),
                cell_bool(o.metrics.get("cutoff_holds") == 1.0),
                cell_bool(o.pass),
            ]
        });
        write_csv(config.out.join("per_sequence.csv"), &header, csv_rows)?;
        let selected_header = ["seed", "id", "code_length", "last_selected_step", "term_bound"];
        let selected_rows = outcomes.iter().flat_map(|o| o.selected_rows.clone());
        write_csv(config.out.join("selected.csv"), &selected_header, selected_rows)?;

        let failures = outcomes.iter().filter(|o| !o.pass).count();
        pass &= failures == 0;
        summary_extra.push(("sequence_checks".into(), outcomes.len() as f64));
        summary_extra.push(("sequence_failures".into(), failures as f64));
        per_seed = outcomes.into_iter().map(|o| o.metrics).collect();
    }

    let mut summary = RunSummary::new(config, per_seed, pass);
    for (k, v) in summary_extra {
        summary.put(&k, v);
    }
    if config.mode != BoundsMode::Chains {
        summary.aggregate_metric("slack");
        summary.aggregate_metric("deficiency_sup");
        summary.aggregate_metric("selected_count");
    }
    Ok(summary)
}
