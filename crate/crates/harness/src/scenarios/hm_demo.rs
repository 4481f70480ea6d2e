//! Interval-contamination demo.
//!
//! A seeded dyadic alpha (odd at full precision) defines the semimeasure
//! Q_alpha: the uniform measure restricted to (0, alpha). The observed
//! sequence is alpha's own binary expansion while the declared truth is
//! bernoulli(1/2), so Q_alpha "knows" the sequence: wherever alpha's next
//! bit is 0, Q_alpha predicts 0 with certainty. A mixture contaminated
//! with Q_alpha at weight w inherits that false certainty and keeps a
//! large error against the 1/2 truth; the MDL predictor over the same
//! class never selects the semimeasure entry (distributions only, by
//! default) and stays near 1/2.
//!
//! Alpha is a seeded pseudo-random stand-in for a lower-semicomputable
//! real; the staged mode emits truncations alpha_t increasing to alpha to
//! mimic approximation from below.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use predlab_core::measures::{BitString, Evaluator, MeasureSpec, UnitRational};
use predlab_core::modelclass::{ClassEntry, ModelClass};
use predlab_core::numkernel::big_rational_to_f64;
use predlab_core::predictors::{trace, PredictorKind};

use crate::config::ScenarioConfig;
use crate::output::{cell_f64, write_csv};
use crate::scenarios::{write_trace, TRACE_HEADER};
use crate::summary::{RunSummary, SeedMetrics};

/// Entry id of the semimeasure inside the demo class.
pub const SEMIMEASURE_ID: usize = 3;

/// Burn-in before the MDL deviation metric starts.
pub const MDL_BURN_IN: usize = 50;

/// Certainty threshold for the zero-bit-position deviation share.
pub const DEV_THRESHOLD: f64 = 0.2;

/// Seeded alpha numerator and its full bit expansion, most significant
/// first. The last bit is forced to 1 so alpha is odd at full precision,
/// positive, and never a shorter dyadic.
fn dyadic_alpha(bits: u32, seed: u64) -> (BigInt, Vec<u8>) {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut numer = BigInt::zero();
    let mut expansion = Vec::with_capacity(bits as usize);
    for _ in 0..bits {
        let b = u8::from(rng.gen::<bool>());
        numer = numer * 2 + b;
        expansion.push(b);
    }
    let last = expansion.last_mut().expect("alpha_bits >= 4n >= 4");
    if *last == 0 {
        numer += 1;
        *last = 1;
    }
    (numer, expansion)
}

/// The demo class: three Bernoulli measures plus the interval semimeasure.
/// Code lengths 1, 3, 3, 2 make the Kraft sum exactly 1; the semimeasure's
/// length is the ceiling of -log2 of the mass the measures leave free.
fn demo_class(alpha: &UnitRational, bits: u32) -> Result<ModelClass, String> {
    let entries = vec![
        ClassEntry::new(
            MeasureSpec::bernoulli_ratio(1, 2).expect("valid"),
            1,
        ),
        ClassEntry::new(
            MeasureSpec::bernoulli_ratio(1, 4).expect("valid"),
            3,
        ),
        ClassEntry::new(
            MeasureSpec::bernoulli_ratio(3, 4).expect("valid"),
            3,
        ),
        ClassEntry::new(
            MeasureSpec::interval(alpha.clone(), bits).map_err(|e| format!("alpha: {e}"))?,
            2,
        ),
    ];
    ModelClass::new(entries).map_err(|e| format!("demo class: {e}"))
}

struct MixStep {
    cond0: f64,
    sq_err: f64,
}

/// Exact conditional trace of M_w = w Q_alpha + (1 - w) uniform along
/// omega. The truth conditional is 1/2 everywhere.
fn mixture_steps(
    q_spec: &MeasureSpec,
    omega: &BitString,
    weight: f64,
) -> Result<Vec<MixStep>, String> {
    let w = BigRational::from_float(weight)
        .ok_or_else(|| format!("weight: {weight} has no finite binary expansion"))?;
    let cw = BigRational::one() - &w;
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let mut q_ev = Evaluator::new(q_spec).map_err(|e| format!("hm-demo: {e}"))?;
    let mut uniform = BigRational::one();
    let mut steps = Vec::with_capacity(omega.len());
    for i in 0..omega.len() {
        let q_x = q_ev.exact_mass();
        let q_x0 = q_ev
            .child_mass_exact(0)
            .map_err(|e| format!("hm-demo step {i}: {e}"))?;
        let u_child = &uniform * &half;
        let m_x = &w * &q_x + &cw * &uniform;
        let m_x0 = &w * q_x0 + &cw * &u_child;
        // m_x >= (1 - w) 2^-i > 0 because w < 1.
        let cond0 = big_rational_to_f64(&(m_x0 / m_x));
        let gap = 0.5 - cond0;
        steps.push(MixStep {
            cond0,
            sq_err: gap * gap,
        });
        q_ev.step(omega.bit(i))
            .map_err(|e| format!("hm-demo step {i}: {e}"))?;
        uniform = u_child;
    }
    Ok(steps)
}

/// Staged truncations alpha_t of alpha (t/8 of the precision, rounded up),
/// each compared to the full-alpha conditional over an early window.
fn staged_rows(
    numer: &BigInt,
    bits: u32,
    q_spec: &MeasureSpec,
    omega: &BitString,
) -> Result<Vec<Vec<String>>, String> {
    const STAGES: u32 = 8;
    let window = omega.len().min(64);
    let mut rows = Vec::with_capacity(STAGES as usize);
    for stage in 1..=STAGES {
        let bits_t = (bits * stage).div_ceil(STAGES);
        let numer_t: BigInt = numer >> (bits - bits_t);
        let (alpha_approx, max_gap) = if numer_t.is_zero() {
            // Truncation lost all mass; the approximation is vacuous.
            (0.0, 1.0)
        } else {
            let alpha_t = UnitRational::new(BigRational::new(
                numer_t,
                BigInt::one() << u64::from(bits_t),
            ))
            .map_err(|e| format!("staged alpha: {e}"))?;
            let approx = alpha_t.to_f64();
            let spec_t = MeasureSpec::interval(alpha_t, bits_t)
                .map_err(|e| format!("staged alpha: {e}"))?;
            let mut full = Evaluator::new(q_spec).map_err(|e| format!("staged: {e}"))?;
            let mut trunc = Evaluator::new(&spec_t).map_err(|e| format!("staged: {e}"))?;
            let mut max_gap = 0.0f64;
            // Conditionals at context length i read child masses at depth
            // i + 1, which must stay below the truncation's precision.
            for i in 0..window.min((bits_t as usize).saturating_sub(1)) {
                if trunc.is_zero() {
                    max_gap = 1.0;
                    break;
                }
                let (f0, _) = full
                    .cond_f64_pair()
                    .map_err(|e| format!("staged step {i}: {e}"))?;
                let (t0, _) = trunc
                    .cond_f64_pair()
                    .map_err(|e| format!("staged step {i}: {e}"))?;
                max_gap = max_gap.max((f0 - t0).abs());
                full.step(omega.bit(i)).map_err(|e| format!("staged: {e}"))?;
                trunc.step(omega.bit(i)).map_err(|e| format!("staged: {e}"))?;
            }
            (approx, max_gap)
        };
        rows.push(vec![
            stage.to_string(),
            bits_t.to_string(),
            cell_f64(alpha_approx),
            cell_f64(max_gap),
        ]);
    }
    Ok(rows)
}

fn run_seed(config: &ScenarioConfig, seed: u64) -> Result<SeedMetrics, String> {
    let bits = config.alpha_bits;
    let n = config.n;
    let (numer, expansion) = dyadic_alpha(bits, seed);
    let alpha = UnitRational::new(BigRational::new(
        numer.clone(),
        BigInt::one() << u64::from(bits),
    ))
    .map_err(|e| format!("alpha: {e}"))?;
    let class = demo_class(&alpha, bits)?;
    let omega = BitString::from_bits(expansion[..n].to_vec());
    let q_spec = class.entries()[SEMIMEASURE_ID].spec.clone();

    let mdl = trace(
        PredictorKind::Mdl {
            gamma: config.gamma,
        },
        0,
        &class,
        &omega,
    )
    .map_err(|e| format!("hm-demo seed {seed}: {e}"))?;
    let mix = mixture_steps(&q_spec, &omega, config.weight)?;

    write_trace(&config.out.join(format!("trace_mdl_{seed}.csv")), &mdl)?;
    let mix_rows = mix.iter().enumerate().map(|(i, s)| {
        vec![
            i.to_string(),
            cell_f64(0.5),
            cell_f64(s.cond0),
            cell_f64(s.sq_err),
            String::new(),
            String::new(),
        ]
    });
    write_csv(
        config.out.join(format!("trace_mixture_{seed}.csv")),
        &TRACE_HEADER,
        mix_rows,
    )?;

    // Zero-bit positions: contexts whose observed next bit is 0, where
    // Q_alpha conditions to certainty.
    let mut position_rows = Vec::new();
    let mut zero_positions = 0usize;
    let mut zero_dev_hits = 0usize;
    for i in 0..n {
        if omega.bit(i) != 0 {
            continue;
        }
        zero_positions += 1;
        let mix_dev = (mix[i].cond0 - 0.5).abs();
        let mdl_dev = (mdl.steps[i].pred_cond0 - 0.5).abs();
        zero_dev_hits += usize::from(mix_dev > DEV_THRESHOLD);
        position_rows.push(vec![
            i.to_string(),
            cell_f64(mix_dev),
            cell_f64(mdl_dev),
        ]);
    }
    write_csv(
        config.out.join(format!("hm_positions_{seed}.csv")),
        &["step", "mix_abs_dev", "mdl_abs_dev"],
        position_rows,
    )?;

    if config.staged {
        let rows = staged_rows(&numer, bits, &q_spec, &omega)?;
        write_csv(
            config.out.join(format!("staged_{seed}.csv")),
            &["stage", "bits_revealed", "alpha_approx", "max_cond_gap"],
            rows,
        )?;
    }

    let mix_total: f64 = mix.iter().map(|s| s.sq_err).sum();
    let mdl_total = mdl.total_sq_err();
    let semimeasure_selected = mdl
        .steps
        .iter()
        .filter(|s| s.selected_id == Some(SEMIMEASURE_ID))
        .count();
    let mdl_dev_after_burn_in = mdl
        .steps
        .iter()
        .skip(MDL_BURN_IN)
        .map(|s| (s.pred_cond0 - 0.5).abs())
        .fold(0.0, f64::max);

    let mut pairs = vec![
        ("mix_total", mix_total),
        ("mdl_total", mdl_total),
        ("zero_positions", zero_positions as f64),
        (
            "zero_dev_share",
            if zero_positions > 0 {
                zero_dev_hits as f64 / zero_positions as f64
            } else {
                0.0
            },
        ),
        ("mdl_max_abs_dev_after_burn_in", mdl_dev_after_burn_in),
        ("semimeasure_selected", semimeasure_selected as f64),
    ];
    if mdl_total > 0.0 {
        pairs.push(("error_ratio", mix_total / mdl_total));
    }
    Ok(SeedMetrics::new(seed, &pairs))
}

pub fn run(config: &ScenarioConfig) -> Result<RunSummary, String> {
    let per_seed: Vec<SeedMetrics> = config
        .seeds
        .par_iter()
        .map(|&seed| run_seed(config, seed))
        .collect::<Result<_, _>>()?;

    let never_selected = per_seed
        .iter()
        .all(|s| s.get("semimeasure_selected") == 0.0);
    let mut summary = RunSummary::new(config, per_seed, never_selected);
    summary.aggregate_metric("mix_total");
    summary.aggregate_metric("mdl_total");
    summary.aggregate_metric("zero_dev_share");
    summary.aggregate_metric("mdl_max_abs_dev_after_burn_in");
    summary.put(
        "semimeasure_never_selected",
        f64::from(u8::from(never_selected)),
    );
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{PartialConfig, ScenarioKind};

    fn demo_config(out: std::path::PathBuf, weight: f64, n: usize) -> ScenarioConfig {
        let flags = PartialConfig {
            n: Some(n),
            weight: Some(weight),
            alpha_bits: Some((4 * n) as u32),
            out: Some(out),
            ..PartialConfig::default()
        };
        ScenarioConfig::resolve(ScenarioKind::HmDemo, PartialConfig::default(), flags).unwrap()
    }

    #[test]
    fn uncontaminated_mixture_is_exactly_uniform() {
        let dir = tempfile::tempdir().unwrap();
        let config = demo_config(dir.path().to_path_buf(), 0.0, 40);
        let summary = run(&config).unwrap();
        assert_eq!(summary.per_seed[0].get("mix_total"), 0.0);
        assert!(summary.pass);
    }

    #[test]
    fn zero_bits_are_predicted_with_certainty_by_the_interval() {
        // At every prefix whose next bit is 0, Q_alpha(0|x) = 1, so the
        // w -> 1 limit of the mixture conditional approaches certainty.
        let (numer, expansion) = dyadic_alpha(160, 3);
        let alpha = UnitRational::new(BigRational::new(
            numer,
            BigInt::one() << 160u64,
        ))
        .unwrap();
        let spec = MeasureSpec::interval(alpha, 160).unwrap();
        let omega = BitString::from_bits(expansion[..40].to_vec());
        let mut ev = Evaluator::new(&spec).unwrap();
        for i in 0..40 {
            let (c0, _) = ev.cond_f64_pair().unwrap();
            if omega.bit(i) == 0 {
                assert_eq!(c0, 1.0, "step {i}");
            }
            ev.step(omega.bit(i)).unwrap();
        }
    }

    #[test]
    fn contaminated_mixture_stays_wrong_while_mdl_recovers() {
        let dir = tempfile::tempdir().unwrap();
        let config = demo_config(dir.path().to_path_buf(), 0.99, 120);
        let summary = run(&config).unwrap();
        let seed0 = &summary.per_seed[0];
        assert!(summary.pass, "semimeasure was selected");
        assert!(seed0.get("mix_total") > seed0.get("mdl_total"));
        assert!(seed0.get("zero_dev_share") > 0.0);
        let staged = dir.path().join("staged_0.csv");
        assert!(!staged.exists(), "staged output without --staged");
    }

    #[test]
    fn staged_truncations_converge_to_alpha() {
        let dir = tempfile::tempdir().unwrap();
        let flags = PartialConfig {
            n: Some(64),
            alpha_bits: Some(256),
            staged: Some(true),
            out: Some(dir.path().to_path_buf()),
            ..PartialConfig::default()
        };
        let config =
            ScenarioConfig::resolve(ScenarioKind::HmDemo, PartialConfig::default(), flags)
                .unwrap();
        run(&config).unwrap();
        let text = std::fs::read_to_string(dir.path().join("staged_0.csv")).unwrap();
        let last = text.lines().last().unwrap();
        // The final stage reveals every bit, so the conditional gap is 0.
        assert!(last.starts_with("8,256,"));
        assert!(last.ends_with(",0"));
    }
}
