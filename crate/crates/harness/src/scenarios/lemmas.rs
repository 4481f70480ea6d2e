//! Convexity-inequality campaigns on seeded random inputs.
//!
//! Per seed, `n` scalar pairs (p, q) in (0, 1] are checked against
//! gap >= (p - q)^2 / (8 ln2) - 1e-12, and n / 10 vector pairs of length
//! up to 64 against the aggregated form sum (p_i - q_i)^2 <= 4 ln2 log2 c.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use predlab_core::numkernel::{convex_gap, convex_gap_floor, convexn_check};

use crate::config::ScenarioConfig;
use crate::output::{cell_f64, write_csv};
use crate::summary::{RunSummary, SeedMetrics};

/// Tolerance for the scalar gap inequality.
const PAIR_SLACK_TOLERANCE: f64 = 1e-12;

struct SeedOutcome {
    metrics: SeedMetrics,
    violations: u64,
}

fn run_seed(seed: u64, pairs: usize, vectors: usize) -> Result<SeedOutcome, String> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut pair_violations = 0u64;
    let mut pair_min_slack = f64::INFINITY;
    for _ in 0..pairs {
        // 1 - u maps [0, 1) onto (0, 1].
        let p = 1.0 - rng.gen::<f64>();
        let q = 1.0 - rng.gen::<f64>();
        let gap = convex_gap(p, q).map_err(|e| format!("lemmas seed {seed}: {e}"))?;
        let slack = gap - convex_gap_floor(p, q);
        pair_min_slack = pair_min_slack.min(slack);
        if slack < -PAIR_SLACK_TOLERANCE {
            pair_violations += 1;
        }
    }

    let mut vector_violations = 0u64;
    let mut vector_min_slack = f64::INFINITY;
    for _ in 0..vectors {
        let len = rng.gen_range(1..=64);
        let ps: Vec<f64> = (0..len).map(|_| 1.0 - rng.gen::<f64>()).collect();
        let qs: Vec<f64> = (0..len).map(|_| 1.0 - rng.gen::<f64>()).collect();
        let report =
            convexn_check(&ps, &qs).map_err(|e| format!("lemmas seed {seed}: {e}"))?;
        vector_min_slack = vector_min_slack.min(report.slack);
        if !report.pass {
            vector_violations += 1;
        }
    }

    let metrics = SeedMetrics::new(
        seed,
        &[
            ("pairs", pairs as f64),
            ("pair_violations", pair_violations as f64),
            ("pair_min_slack", pair_min_slack),
            ("vectors", vectors as f64),
            ("vector_violations", vector_violations as f64),
            ("vector_min_slack", vector_min_slack),
        ],
    );
    Ok(SeedOutcome {
        metrics,
        violations: pair_violations + vector_violations,
    })
}

pub fn run(config: &ScenarioConfig) -> Result<RunSummary, String> {
    let pairs = config.n;
    let vectors = (config.n / 10).max(1);
    let outcomes: Vec<SeedOutcome> = config
        .seeds
        .par_iter()
        .map(|&seed| run_seed(seed, pairs, vectors))
        .collect::<Result<_, _>>()?;

    let header = [
        "seed",
        "pairs",
        "pair_violations",
        "pair_min_slack",
        "vectors",
        "vector_violations",
        "vector_min_slack",
    ];
    let rows = outcomes.iter().map(|o| {
        vec![
            o.metrics.seed.to_string(),
            (pairs).to_string(),
            cell_f64(o.metrics.get("pair_violations")),
            cell_f64(o.metrics.get("pair_min_slack")),
            (vectors).to_string(),
            cell_f64(o.metrics.get("vector_violations")),
            cell_f64(o.metrics.get("vector_min_slack")),
        ]
    });
    write_csv(config.out.join("lemmas.csv"), &header, rows)?;

    let total_violations: u64 = outcomes.iter().map(|o| o.violations).sum();
    let per_seed: Vec<SeedMetrics> = outcomes.into_iter().map(|o| o.metrics).collect();
    let mut summary = RunSummary::new(config, per_seed, total_violations == 0);
    summary.put("total_pairs", (pairs * config.seeds.len()) as f64);
    summary.put("total_vectors", (vectors * config.seeds.len()) as f64);
    summary.put("total_violations", total_violations as f64);
    let min_pair = summary
        .per_seed
        .iter()
        .map(|s| s.get("pair_min_slack"))
        .fold(f64::INFINITY, f64::min);
    let min_vec = summary
        .per_seed
        .iter()
        .map(|s| s.get("vector_min_slack"))
        .fold(f64::INFINITY, f64::min);
    summary.put("min_pair_slack", min_pair);
    summary.put("min_vector_slack", min_vec);
    Ok(summary)
}
