//! The MDL best-explanation predictor, the mixture baseline, and per-step
//! prediction tracing.
//!
//! The MDL selector scores each candidate entry Q at a string x by
//!
//! ```text
//! score(Q, x) = gamma * L(Q) - log2 Q(x)        (gamma > 1, default 3)
//! ```
//!
//! and predicts with the conditional of the minimal-score entry, ties going
//! to the smaller code length and then the smaller id. The mixture baseline
//! predicts with xi(xb)/xi(x).
//!
//! Selection flips must not depend on round-off: scores are compared in the
//! float log domain first, and any pair within a narrow band is re-compared
//! with sharper log evaluation and finally in exact rational arithmetic
//! (for dyadic gamma), so the reported winner is the true argmin.

use std::cmp::Ordering;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::One;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::{walk, BitString};
use crate::modelclass::{MixtureWalker, ModelClass};
use crate::numkernel::log2_rational;

/// Two scores within this many bits of each other (in the first-pass float
/// evaluation) are re-compared with sharper arithmetic before deciding.
const SCORE_COARSE_BAND: f64 = 1e-6;

/// Residual band after the sharper log evaluation; pairs still inside it
/// are decided in exact rational arithmetic.
const SCORE_REFINED_BAND: f64 = 1e-12;

/// Largest number of fractional bits for which gamma is treated as an
/// exact dyadic rational in the final comparison stage. Beyond this the
/// refined float comparison decides (its error is around 1e-14 bits).
const GAMMA_DYADIC_BITS: u32 = 12;

/// One entry's MDL score at a string, split into its two components.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScoredEntry {
    pub id: usize,
    /// gamma * L(Q).
    pub penalty: f64,
    /// -log2 Q(x); +inf when Q(x) = 0.
    pub codelength: f64,
    /// penalty + codelength, exactly as the two fields add in f64.
    pub score: f64,
}

impl ScoredEntry {
    fn new(id: usize, penalty: f64, codelength: f64) -> Self {
        ScoredEntry {
            id,
            penalty,
            codelength,
            score: penalty + codelength,
        }
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma > 1.0) {
        return Err(Error::InvalidGamma(gamma));
    }
    Ok(())
}

/// MDL score of one entry: gamma * L(Q) - log2 Q(x), +inf when Q(x) = 0.
pub fn mdl_score(
    class: &ModelClass,
    id: usize,
    x: &BitString,
    gamma: f64,
) -> Result<ScoredEntry> {
    check_gamma(gamma)?;
    let entry = class.entry(id)?;
    let ev = walk(&entry.spec, x)?;
    let penalty = gamma * f64::from(entry.code_length);
    Ok(ScoredEntry::new(id, penalty, -ev.log2_mass()))
}

/// gamma as an exact dyadic rational g / 2^s with the smallest s, if one
/// exists with s <= GAMMA_DYADIC_BITS.
fn dyadic_gamma(gamma: f64) -> Option<(i64, u32)> {
    for s in 0..=GAMMA_DYADIC_BITS {
        let scaled = gamma * f64::from(1u32 << s);
        if scaled.fract() == 0.0 && scaled.abs() < 9e15 {
            return Some((scaled as i64, s));
        }
    }
    None
}

/// Exact ordering of score(a) vs score(b) for dyadic gamma = g / 2^s.
///
/// score(a) - score(b) has the sign of g*(L_a - L_b) - 2^s * log2(Q_a/Q_b),
/// which is the sign of 2^(g*(L_a - L_b)) - (Q_a/Q_b)^(2^s); both sides are
/// exact rationals.
fn compare_scores_exact(
    g: i64,
    s: u32,
    l_a: u32,
    mass_a: &BigRational,
    l_b: u32,
    mass_b: &BigRational,
) -> Ordering {
    let d = g * (i64::from(l_a) - i64::from(l_b));
    if mass_a == mass_b {
        return d.cmp(&0);
    }
    if d == 0 {
        // Smaller score iff larger mass.
        return mass_b.cmp(mass_a);
    }
    let lhs = if d >= 0 {
        BigRational::from(BigInt::one() << d as u64)
    } else {
        BigRational::new(BigInt::one(), BigInt::one() << d.unsigned_abs())
    };
    let rho = mass_a / mass_b;
    let rhs = num::pow::pow(rho, 1usize << s);
    lhs.cmp(&rhs)
}

/// Minimal-score entry among the current walker position's candidates.
///
/// Candidates are the measure entries with positive mass; semimeasure
/// entries join only when `admit_semimeasures` is set. Ties break toward
/// the smaller code length, then the smaller id.
pub fn select_best(
    walker: &MixtureWalker,
    gamma: f64,
    admit_semimeasures: bool,
) -> Result<ScoredEntry> {
    select_best_among(walker, gamma, admit_semimeasures, walker.class().len())
}

/// As `select_best`, restricted to entry ids below `id_limit`. Lets a
/// caller keep selection on the original entries of a pair-extended class
/// while the extended mixture still defines complexity and domination.
pub fn select_best_among(
    walker: &MixtureWalker,
    gamma: f64,
    admit_semimeasures: bool,
    id_limit: usize,
) -> Result<ScoredEntry> {
    check_gamma(gamma)?;
    let class = walker.class();
    let mut candidates: Vec<ScoredEntry> = Vec::new();
    for (id, entry) in class.entries().iter().enumerate().take(id_limit) {
        if !admit_semimeasures && !entry.spec.is_measure() {
            continue;
        }
        let ev = walker.evaluator(id);
        if ev.is_zero() {
            continue;
        }
        let penalty = gamma * f64::from(entry.code_length);
        candidates.push(ScoredEntry::new(id, penalty, -ev.log2_mass()));
    }
    if candidates.is_empty() {
        return Err(Error::NoExplanation {
            string: walker.context().to_string(),
        });
    }

    let coarse_min = candidates
        .iter()
        .map(|c| c.score)
        .fold(f64::INFINITY, f64::min);
    let mut shortlist: Vec<&ScoredEntry> = candidates
        .iter()
        .filter(|c| c.score <= coarse_min + SCORE_COARSE_BAND)
        .collect();
    if shortlist.len() > 1 {
        // Sharper pass: exact mass, one log evaluation per survivor.
        let refined: Vec<f64> = shortlist
            .iter()
            .map(|c| c.penalty - log2_rational(&walker.evaluator(c.id).exact_mass()))
            .collect();
        let refined_min = refined.iter().cloned().fold(f64::INFINITY, f64::min);
        let survivors: Vec<&ScoredEntry> = shortlist
            .iter()
            .zip(&refined)
            .filter(|(_, r)| **r <= refined_min + SCORE_REFINED_BAND)
            .map(|(c, _)| *c)
            .collect();
        shortlist = survivors;
    }

    let exact_gamma = dyadic_gamma(gamma);
    let winner = shortlist
        .into_iter()
        .reduce(|best, next| {
            let order = match exact_gamma {
                Some((g, s)) => compare_scores_exact(
                    g,
                    s,
                    class.entries()[next.id].code_length,
                    &walker.evaluator(next.id).exact_mass(),
                    class.entries()[best.id].code_length,
                    &walker.evaluator(best.id).exact_mass(),
                ),
                // Non-dyadic gamma: the refined pass already bounded the
                // difference below 1e-12 bits; treat as a tie.
                None => Ordering::Equal,
            };
            let next_wins = match order {
                Ordering::Less => true,
                Ordering::Greater => false,
                Ordering::Equal => {
                    let (ln, lb) = (
                        class.entries()[next.id].code_length,
                        class.entries()[best.id].code_length,
                    );
                    ln < lb || (ln == lb && next.id < best.id)
                }
            };
            if next_wins {
                next
            } else {
                best
            }
        })
        .expect("shortlist is non-empty");
    Ok(*winner)
}

/// The minimal-score entry at x; measure entries only.
pub fn best_explanation(class: &ModelClass, x: &BitString, gamma: f64) -> Result<ScoredEntry> {
    best_explanation_admitting(class, x, gamma, false)
}

/// As `best_explanation`, optionally admitting semimeasure entries.
pub fn best_explanation_admitting(
    class: &ModelClass,
    x: &BitString,
    gamma: f64,
    admit_semimeasures: bool,
) -> Result<ScoredEntry> {
    check_gamma(gamma)?;
    let mut walker = MixtureWalker::new(class)?;
    for &b in x.bits() {
        walker.step(b)?;
    }
    select_best(&walker, gamma, admit_semimeasures)
}

/// H(b|x): the conditional of the best explanation at x.
pub fn mdl_predict(class: &ModelClass, x: &BitString, bit: u8, gamma: f64) -> Result<f64> {
    let best = best_explanation(class, x, gamma)?;
    let spec = &class.entry(best.id)?.spec;
    crate::measures::cond_prob(spec, x, bit)
}

/// Mixture prediction xi(xb)/xi(x).
pub fn mixture_predict(class: &ModelClass, x: &BitString, bit: u8) -> Result<f64> {
    let mut walker = MixtureWalker::new(class)?;
    for &b in x.bits() {
        walker.step(b)?;
    }
    walker.cond_f64(bit)
}

/// Which predictor a trace or tree walk runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PredictorKind {
    Mdl { gamma: f64 },
    Mixture,
    Single { entry: usize },
}

/// Predicted conditional of 0 at the walker's position, plus the selected
/// entry when the predictor is MDL.
pub fn predicted_cond0(
    kind: PredictorKind,
    walker: &MixtureWalker,
) -> Result<(f64, Option<ScoredEntry>)> {
    match kind {
        PredictorKind::Mdl { gamma } => {
            let best = select_best(walker, gamma, false)?;
            let (c0, _) = walker.evaluator(best.id).cond_f64_pair()?;
            Ok((c0, Some(best)))
        }
        PredictorKind::Mixture => Ok((walker.cond_f64(0)?, None)),
        PredictorKind::Single { entry } => {
            walker.class().entry(entry)?;
            let (c0, _) = walker.evaluator(entry).cond_f64_pair()?;
            Ok((c0, None))
        }
    }
}

/// One prediction step: both conditionals of 0 at the same proper prefix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepRecord {
    /// Context length: this record predicts bit number `step`.
    pub step: usize,
    pub truth_cond0: f64,
    pub pred_cond0: f64,
    /// (truth_cond0 - pred_cond0)^2.
    pub sq_err: f64,
    /// MDL only: the selected entry and its score.
    pub selected_id: Option<usize>,
    pub selected_score: Option<f64>,
}

/// Per-step records along a sequence plus running error sums.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PredictionTrace {
    pub steps: Vec<StepRecord>,
    /// cumulative[i] = sum of sq_err over steps 0..=i.
    pub cumulative: Vec<f64>,
}

impl PredictionTrace {
    pub fn total_sq_err(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }
}

/// Runs a predictor along every proper prefix of `omega`, recording the
/// squared gap to the true conditional at each step.
pub fn trace(
    kind: PredictorKind,
    truth: usize,
    class: &ModelClass,
    omega: &BitString,
) -> Result<PredictionTrace> {
    if let PredictorKind::Mdl { gamma } = kind {
        check_gamma(gamma)?;
    }
    class.entry(truth)?;
    let mut walker = MixtureWalker::new(class)?;
    let mut steps = Vec::with_capacity(omega.len());
    let mut cumulative = Vec::with_capacity(omega.len());
    let mut total = 0.0;
    let at = |step: usize| {
        move |e: Error| Error::AtStep {
            op: "trace",
            step,
            source: Box::new(e),
        }
    };
    for i in 0..omega.len() {
        let (truth_cond0, _) = walker.evaluator(truth).cond_f64_pair().map_err(at(i))?;
        let (pred_cond0, selected) = predicted_cond0(kind, &walker).map_err(at(i))?;
        let sq_err = (truth_cond0 - pred_cond0) * (truth_cond0 - pred_cond0);
        total += sq_err;
        steps.push(StepRecord {
            step: i,
            truth_cond0,
            pred_cond0,
            sq_err,
            selected_id: selected.map(|s| s.id),
            selected_score: selected.map(|s| s.score),
        });
        cumulative.push(total);
        if i + 1 < omega.len() {
            walker.step(omega.bit(i)).map_err(at(i))?;
        }
    }
    Ok(PredictionTrace { steps, cumulative })
}
