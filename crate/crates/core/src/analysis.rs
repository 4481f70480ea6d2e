//! Error-sum computations and explicit-constant bound verification.
//!
//! Every asymptotic bound is rendered with concrete constants so it can be
//! checked numerically:
//!
//! * the two-measure chain: with R the per-step conditional average of P
//!   and Q, K_pair = L(P) + L(Q) + 2, and C = max(xi/P, xi/Q) at x,
//!
//!   ```text
//!   sum_{i=1}^{n-1} (p_i - q_i)^2  <=  4 ln2 log2 c  <=  8 ln2 (log2 C + K_pair)
//!   ```
//!
//!   where c = R(x)^2 / (P(x) Q(x));
//! * the truncated expected error sum over all strings below a depth;
//! * the per-sequence assembly: one chain term per entry the MDL selector
//!   ever picked, plus 1 for each entry's final selection step;
//! * the KL chain rule between length-k marginals, its domination bound,
//!   and the Pinsker aggregation of squared errors.

use std::collections::BTreeMap;
use std::f64::consts::LN_2;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::BitString;
use crate::modelclass::{MixtureWalker, ModelClass};
use crate::numkernel::kl_bernoulli;
use crate::predictors::{predicted_cond0, select_best_among, PredictorKind};
use crate::report::{BoundReport, SLACK_TOLERANCE};

/// Depth cap for exhaustive tree traversals of the expected error sum.
pub const EXPECT_DEPTH_MAX: u32 = 20;

/// Depth cap for exact KL marginal enumeration.
pub const KL_DEPTH_MAX: usize = 16;

/// Verifies the two-measure inequality chain at x and reports the measured
/// squared-difference sum against 8 ln2 (log2 C + K_pair).
///
/// The class must contain the conditional average of entries `p_id` and
/// `q_id` (a pairwise-extended class); for `p_id == q_id` the entry itself
/// serves as the average. The intermediate links are checked in the log
/// domain on the accumulated per-entry logs, whose rounding error is
/// orders of magnitude below the slack tolerance; a link failure is an
/// implementation bug surfaced as a chain-link error, not a reportable
/// outcome.
pub fn vovk_bound_check(
    class: &ModelClass,
    p_id: usize,
    q_id: usize,
    x: &BitString,
) -> Result<BoundReport> {
    let p_entry = class.entry(p_id)?;
    let q_entry = class.entry(q_id)?;
    if !p_entry.spec.is_measure() || !q_entry.spec.is_measure() {
        return Err(Error::NotAMeasure);
    }
    let l_p = p_entry.code_length;
    let l_q = q_entry.code_length;
    let k_pair = l_p + l_q + 2;
    let r_id = if p_id == q_id {
        p_id
    } else {
        class
            .pair_entry(p_id, q_id)
            .ok_or(Error::MissingPairAverage { p: p_id, q: q_id })?
    };

    let mut walker = MixtureWalker::new(class)?;
    let n = x.len();
    let mut sum = 0.0;
    for t in 0..n {
        if t + 1 < n {
            let (pc0, _) = walker.evaluator(p_id).cond_f64_pair()?;
            let (qc0, _) = walker.evaluator(q_id).cond_f64_pair()?;
            sum += (pc0 - qc0) * (pc0 - qc0);
        }
        walker.step(x.bit(t))?;
    }

    for id in [p_id, q_id] {
        if walker.evaluator(id).is_zero() {
            return Err(Error::ZeroProbability {
                entry: id,
                string: x.to_string(),
            });
        }
    }
    let log2_p = walker.evaluator(p_id).log2_mass();
    let log2_q = walker.evaluator(q_id).log2_mass();
    let log2_r = walker.evaluator(r_id).log2_mass();
    let log2_xi = walker.log2_xi();
    let log2_c = 2.0 * log2_r - log2_p - log2_q;
    let log2_dom = (log2_xi - log2_p).max(log2_xi - log2_q);

    // Link: R(x) <= 2^K_pair xi(x). Holds because the average is a class
    // entry of code length at most K_pair.
    if log2_r > f64::from(k_pair) + log2_xi + SLACK_TOLERANCE {
        return Err(Error::ChainLink {
            link: "average_dominated_by_mixture",
            detail: format!("log2 R(x) = {log2_r} > {k_pair} + {log2_xi} at {x}"),
        });
    }
    // Link: c = R^2/(PQ) <= C^2 2^(2 K_pair) with C = max(xi/P, xi/Q).
    if log2_c > 2.0 * log2_dom + 2.0 * f64::from(k_pair) + SLACK_TOLERANCE {
        return Err(Error::ChainLink {
            link: "mean_ratio_vs_domination",
            detail: format!("log2 c = {log2_c} > 2 ({log2_dom} + {k_pair}) at {x}"),
        });
    }

    // Link: the convexity bound, sum <= 4 ln2 log2 c.
    if sum > 4.0 * LN_2 * log2_c + SLACK_TOLERANCE {
        return Err(Error::ChainLink {
            link: "sum_vs_mean_ratio",
            detail: format!("sum {sum} > 4 ln2 * {log2_c} at {x}"),
        });
    }

    let bound = 8.0 * LN_2 * (log2_dom + f64::from(k_pair));
    let mut report = BoundReport::new(sum, bound);
    report.log2_domination = Some(log2_dom);
    report.log2_mean_ratio = Some(log2_c);
    report.pair_code_length = Some(k_pair);
    report.code_length_p = Some(l_p);
    report.code_length_q = Some(l_q);
    Ok(report)
}

/// Truncated expected squared prediction error,
/// sum over all strings with |x| < depth of P(x) [P(0|x) - pred(0|x)]^2.
pub fn expected_sq_error(
    class: &ModelClass,
    truth: usize,
    kind: PredictorKind,
    depth: u32,
) -> Result<f64> {
    if depth > EXPECT_DEPTH_MAX {
        return Err(Error::DepthLimit {
            depth,
            max: EXPECT_DEPTH_MAX,
        });
    }
    let entry = class.entry(truth)?;
    if !entry.spec.is_measure() {
        return Err(Error::NotAMeasure);
    }
    let walker = MixtureWalker::new(class)?;
    let mut acc = 0.0;
    expected_walk(&walker, truth, kind, 1.0, depth, &mut acc)?;
    Ok(acc)
}

fn expected_walk(
    walker: &MixtureWalker,
    truth: usize,
    kind: PredictorKind,
    p: f64,
    left: u32,
    acc: &mut f64,
) -> Result<()> {
    if left == 0 {
        return Ok(());
    }
    let (pc0, pc1) = walker.evaluator(truth).cond_f64_pair()?;
    let (h0, _) = predicted_cond0(kind, walker)?;
    *acc += p * (pc0 - h0) * (pc0 - h0);
    for (b, pcb) in [(0u8, pc0), (1u8, pc1)] {
        if pcb == 0.0 {
            continue;
        }
        let mut child = walker.clone();
        child.step(b)?;
        expected_walk(&child, truth, kind, p * pcb, left - 1, acc)?;
    }
    Ok(())
}

/// One entry the MDL selector picked at least once along a sequence.
#[derive(Debug, Clone, Serialize)]
pub struct SelectedModel {
    pub id: usize,
    pub code_length: u32,
    /// Last context length at which this entry was selected.
    pub last_selected_step: usize,
    /// Chain report for the prefix through that selection's observed bit.
    pub chain: BoundReport,
}

/// Per-sequence error bound assembly for the MDL predictor.
#[derive(Debug, Clone, Serialize)]
pub struct PerSequenceReport {
    /// sum = measured MDL error sum along the sequence; bound = one chain
    /// term per selected entry plus 1 each for the final selection steps.
    pub report: BoundReport,
    pub selected: Vec<SelectedModel>,
    /// gamma L(P) + D + 1; every selected Q must keep (gamma-1) L(Q)
    /// at or below this.
    pub cutoff_rhs: f64,
    pub cutoff_holds: bool,
    /// 2^(cutoff_rhs / (gamma-1)), the cap on how many entries can ever
    /// be selected.
    pub count_limit: f64,
    pub count_ok: bool,
}

/// Measures the MDL predictor's squared-error sum along `omega` and checks
/// it against the assembled explicit bound.
///
/// Selection runs over the original (non-extended) entries; the extended
/// class supplies the mixture for complexity, deficiency, and the
/// per-pair chain terms. Requires the conditional average of (truth, Q)
/// for every other selected Q, so the class should be pair-extended.
pub fn per_sequence_bound(
    class: &ModelClass,
    truth: usize,
    omega: &BitString,
    gamma: f64,
) -> Result<PerSequenceReport> {
    if !(gamma > 1.0) {
        return Err(Error::InvalidGamma(gamma));
    }
    let truth_entry = class.entry(truth)?;
    if !truth_entry.spec.is_measure() {
        return Err(Error::NotAMeasure);
    }
    if truth >= class.base_len() {
        return Err(Error::EntryOutOfRange {
            id: truth,
            len: class.base_len(),
        });
    }
    let l_p = truth_entry.code_length;
    let n = omega.len();
    let mut walker = MixtureWalker::new(class)?;
    let mut sum = 0.0;
    let mut d_sup = f64::NEG_INFINITY;
    let mut last_sel: BTreeMap<usize, usize> = BTreeMap::new();
    for i in 0..=n {
        let pev = walker.evaluator(truth);
        if pev.is_zero() {
            return Err(Error::ZeroProbability {
                entry: truth,
                string: omega.prefix(i).to_string(),
            });
        }
        let d = -pev.log2_mass() - walker.ka()? as f64;
        d_sup = d_sup.max(d);
        if i < n {
            let best = select_best_among(&walker, gamma, false, class.base_len())?;
            let (pc0, _) = walker.evaluator(truth).cond_f64_pair()?;
            let (hc0, _) = walker.evaluator(best.id).cond_f64_pair()?;
            sum += (pc0 - hc0) * (pc0 - hc0);
            last_sel.insert(best.id, i);
            walker.step(omega.bit(i))?;
        }
    }

    let mut bound = 0.0;
    let mut selected = Vec::with_capacity(last_sel.len());
    let mut cutoff_holds = true;
    let cutoff_rhs = gamma * f64::from(l_p) + d_sup + 1.0;
    for (&q, &t) in &last_sel {
        let y = omega.prefix(t + 1);
        if q != truth && class.pair_entry(truth, q).is_none() {
            return Err(Error::MissingPairAverage { p: truth, q });
        }
        let chain = vovk_bound_check(class, truth, q, &y)?;
        // The chain covers every selection step for q except the last
        // one; a single squared error never exceeds 1.
        bound += chain.bound + 1.0;
        let l_q = class.entries()[q].code_length;
        if (gamma - 1.0) * f64::from(l_q) > cutoff_rhs + SLACK_TOLERANCE {
            cutoff_holds = false;
        }
        selected.push(SelectedModel {
            id: q,
            code_length: l_q,
            last_selected_step: t,
            chain,
        });
    }
    let count_limit = (cutoff_rhs / (gamma - 1.0)).exp2();
    let count_ok = (selected.len() as f64) <= count_limit + SLACK_TOLERANCE;

    let mut report = BoundReport::new(sum, bound);
    report.deficiency_sup = Some(d_sup);
    report.code_length_p = Some(l_p);
    Ok(PerSequenceReport {
        report,
        selected,
        cutoff_rhs,
        cutoff_holds,
        count_limit,
        count_ok,
    })
}

/// KL chain-rule verification between length-k marginals of the truth and
/// a predictor's implied process.
#[derive(Debug, Clone, Serialize)]
pub struct KlChainReport {
    pub depth: usize,
    /// kl[j] = KL(P_j, M_j) in bits, j = 0..=depth.
    pub kl: Vec<f64>,
    /// expected_increments[j] = sum over |x| = j-1 of
    /// P(x) kl(P(0|x), M(0|x)); index 0 is unused and holds 0.
    pub expected_increments: Vec<f64>,
    /// max over j of |kl[j] - kl[j-1] - expected_increments[j]|.
    pub max_chain_residual: f64,
    /// sum over |x| < depth of P(x) (P(0|x) - M(0|x))^2.
    pub sq_sum: f64,
    /// log2 max over P-positive |x| <= depth of P(x)/M(x).
    pub log2_domination: f64,
    pub chain_ok: bool,
    pub dominated: bool,
    pub pinsker_ok: bool,
    pub pass: bool,
}

struct KlAcc {
    kl: Vec<f64>,
    inc: Vec<f64>,
    level_max: Vec<f64>,
    sq: f64,
}

/// Enumerates the depth-k tree exactly and verifies that KL between the
/// length-k marginals telescopes by the expected per-level Bernoulli
/// divergences, stays below the domination constant, and dominates the
/// Pinsker-aggregated squared error sum.
pub fn kl_chain_check(
    class: &ModelClass,
    p_id: usize,
    kind: PredictorKind,
    k: usize,
) -> Result<KlChainReport> {
    if k > KL_DEPTH_MAX {
        return Err(Error::DepthLimit {
            depth: k as u32,
            max: KL_DEPTH_MAX as u32,
        });
    }
    let entry = class.entry(p_id)?;
    if !entry.spec.is_measure() {
        return Err(Error::NotAMeasure);
    }
    let walker = MixtureWalker::new(class)?;
    let mut acc = KlAcc {
        kl: vec![0.0; k + 1],
        inc: vec![0.0; k + 1],
        level_max: vec![f64::NEG_INFINITY; k + 1],
        sq: 0.0,
    };
    kl_walk(&walker, p_id, kind, 1.0, 0.0, 0.0, k, &mut acc)?;

    let mut max_residual = 0.0f64;
    for j in 1..=k {
        max_residual = max_residual.max((acc.kl[j] - acc.kl[j - 1] - acc.inc[j]).abs());
    }
    let mut dominated = true;
    let mut running_max = f64::NEG_INFINITY;
    for j in 0..=k {
        running_max = running_max.max(acc.level_max[j]);
        if acc.kl[j] > running_max + SLACK_TOLERANCE {
            dominated = false;
        }
    }
    let chain_ok = max_residual <= SLACK_TOLERANCE;
    let pinsker_ok = acc.sq <= LN_2 / 2.0 * acc.kl[k] + SLACK_TOLERANCE;
    Ok(KlChainReport {
        depth: k,
        pass: chain_ok && dominated && pinsker_ok,
        kl: acc.kl,
        expected_increments: acc.inc,
        max_chain_residual: max_residual,
        sq_sum: acc.sq,
        log2_domination: running_max,
        chain_ok,
        dominated,
        pinsker_ok,
    })
}

fn kl_walk(
    walker: &MixtureWalker,
    p_id: usize,
    kind: PredictorKind,
    p: f64,
    log2_p: f64,
    log2_m: f64,
    left: usize,
    acc: &mut KlAcc,
) -> Result<()> {
    let j = walker.depth();
    acc.kl[j] += p * (log2_p - log2_m);
    acc.level_max[j] = acc.level_max[j].max(log2_p - log2_m);
    if left == 0 {
        return Ok(());
    }
    let (pc0, pc1) = walker.evaluator(p_id).cond_f64_pair()?;
    let (m0, _) = predicted_cond0(kind, walker)?;
    // Identical conditionals contribute zero even at the endpoints where
    // the Bernoulli divergence itself is undefined.
    let term = if pc0 == m0 { 0.0 } else { kl_bernoulli(pc0, m0)? };
    acc.inc[j + 1] += p * term;
    acc.sq += p * (pc0 - m0) * (pc0 - m0);
    let m1 = 1.0 - m0;
    for (b, pcb, mcb) in [(0u8, pc0, m0), (1u8, pc1, m1)] {
        if pcb == 0.0 {
            continue;
        }
        let mut child = walker.clone();
        child.step(b)?;
        kl_walk(
            &child,
            p_id,
            kind,
            p * pcb,
            log2_p + pcb.log2(),
            log2_m + mcb.log2(),
            left - 1,
            acc,
        )?;
    }
    Ok(())
}

/// Reference shape of the per-sequence bound,
/// (L_P + D + 1) * 2^((gamma L_P + D + 1)/(gamma - 1)).
///
/// Pure formula evaluation for reporting; meaningful for D >= -L_P - 1 and
/// gamma > 1.
pub fn bound_values(code_length_p: u32, deficiency: f64, gamma: f64) -> f64 {
    let l = f64::from(code_length_p);
    let exponent = (gamma * l + deficiency + 1.0) / (gamma - 1.0);
    (l + deficiency + 1.0) * exponent.exp2()
}

/// One deficiency shell: how many observed suprema reached d, against the
/// 2^-d mass bound plus three binomial standard errors.
#[derive(Debug, Clone, Serialize)]
pub struct ShellBin {
    pub d: u32,
    pub count: usize,
    pub frequency: f64,
    pub mass_bound: f64,
    /// mass_bound + 3 sqrt(mass_bound (1 - mass_bound) / total).
    pub limit: f64,
    pub ok: bool,
}

/// Monte Carlo check of the deficiency tail bound P(D >= d) <= 2^-d.
#[derive(Debug, Clone, Serialize)]
pub struct ShellHistogram {
    pub total: usize,
    pub bins: Vec<ShellBin>,
    pub pass: bool,
}

/// Bins observed deficiency suprema by integer thresholds d = 1..=d_max
/// and checks each tail frequency against 2^-d within sampling error.
pub fn shell_check(sups: &[f64], d_max: u32) -> Result<ShellHistogram> {
    if sups.is_empty() {
        return Err(Error::EmptyInput);
    }
    let total = sups.len();
    let mut bins = Vec::with_capacity(d_max as usize);
    let mut pass = true;
    for d in 1..=d_max {
        let count = sups.iter().filter(|&&s| s >= f64::from(d)).count();
        let frequency = count as f64 / total as f64;
        let mass_bound = (-f64::from(d)).exp2();
        let se = (mass_bound * (1.0 - mass_bound) / total as f64).sqrt();
        let limit = mass_bound + 3.0 * se;
        let ok = frequency <= limit;
        pass &= ok;
        bins.push(ShellBin {
            d,
            count,
            frequency,
            mass_bound,
            limit,
            ok,
        });
    }
    Ok(ShellHistogram { total, bins, pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{sample_sequence, MeasureSpec};
    use crate::modelclass::ClassEntry;
    use crate::numkernel::log2_rational;
    use crate::predictors::trace;
    use num::bigint::BigInt;
    use num::rational::BigRational;
    use proptest::prelude::*;

    fn bern(n: u64, d: u64) -> MeasureSpec {
        MeasureSpec::bernoulli_ratio(n, d).unwrap()
    }

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn two_entry() -> ModelClass {
        ModelClass::new(vec![
            ClassEntry::new(bern(1, 2), 1),
            ClassEntry::new(bern(3, 4), 2),
        ])
        .unwrap()
    }

    #[test]
    fn vovk_hand_example() {
        let class = two_entry().with_pairwise_averages().unwrap();
        let rep = vovk_bound_check(&class, 0, 1, &bs("1111")).unwrap();
        // Three covered steps, each difference 1/4.
        assert_eq!(rep.sum, 0.1875);
        // R follows bernoulli(5/8): c = (5/8)^8 / (2^-4 (3/4)^4).
        let want_log2_c = log2_rational(&rat(390_625, 331_776));
        assert!((rep.log2_mean_ratio.unwrap() - want_log2_c).abs() < 1e-9);
        // xi("1111") = 15089/131072, so C = xi/P = 15089/8192.
        let want_log2_dom = log2_rational(&rat(15_089, 8_192));
        assert!((rep.log2_domination.unwrap() - want_log2_dom).abs() < 1e-9);
        assert_eq!(rep.pair_code_length, Some(5));
        let want_bound = 8.0 * LN_2 * (want_log2_dom + 5.0);
        assert!((rep.bound - want_bound).abs() < 1e-9);
        assert!(rep.pass);
        assert_eq!(rep.slack, rep.bound - rep.sum);
    }

    #[test]
    fn vovk_identical_entries_are_trivial() {
        let class = two_entry().with_pairwise_averages().unwrap();
        let rep = vovk_bound_check(&class, 0, 0, &bs("110100")).unwrap();
        assert_eq!(rep.sum, 0.0);
        assert_eq!(rep.log2_mean_ratio.unwrap(), 0.0);
        assert_eq!(rep.pair_code_length, Some(4));
        assert!(rep.pass);
    }

    #[test]
    fn vovk_requires_the_pair_average() {
        let class = two_entry();
        assert!(matches!(
            vovk_bound_check(&class, 0, 1, &bs("1")),
            Err(Error::MissingPairAverage { p: 0, q: 1 })
        ));
    }

    #[test]
    fn vovk_rejects_zero_mass() {
        let class = ModelClass::new(vec![
            ClassEntry::new(bern(1, 1), 2),
            ClassEntry::new(bern(1, 2), 2),
        ])
        .unwrap()
        .with_pairwise_averages()
        .unwrap();
        assert!(matches!(
            vovk_bound_check(&class, 0, 1, &bs("0")),
            Err(Error::ZeroProbability { entry: 0, .. })
        ));
    }

    #[test]
    fn expected_error_of_self_prediction_is_zero() {
        let class = ModelClass::new(vec![ClassEntry::new(bern(2, 3), 0)]).unwrap();
        for depth in 0..=6 {
            let e =
                expected_sq_error(&class, 0, PredictorKind::Mdl { gamma: 3.0 }, depth).unwrap();
            assert_eq!(e, 0.0);
        }
    }

    #[test]
    fn expected_error_hand_values() {
        let class = two_entry();
        // The selector keeps bernoulli(1/2) on every context of length < 2.
        let e = expected_sq_error(&class, 0, PredictorKind::Mdl { gamma: 3.0 }, 2).unwrap();
        assert_eq!(e, 0.0);
        let e = expected_sq_error(&class, 0, PredictorKind::Mixture, 1).unwrap();
        let step0 = (0.5 - 5.0 / 12.0) * (0.5 - 5.0 / 12.0);
        assert!((e - step0).abs() < 1e-12, "e = {e}");
    }

    #[test]
    fn expected_error_depth_cap() {
        let class = two_entry();
        assert!(matches!(
            expected_sq_error(&class, 0, PredictorKind::Mixture, 21),
            Err(Error::DepthLimit { depth: 21, max: 20 })
        ));
    }

    #[test]
    fn expected_error_matches_monte_carlo() {
        let class = two_entry();
        let depth = 6u32;
        let spec = class.entry(1).unwrap().spec.clone();
        for kind in [PredictorKind::Mdl { gamma: 3.0 }, PredictorKind::Mixture] {
            let want = expected_sq_error(&class, 1, kind, depth).unwrap();
            let n = 10_000;
            let mut mean = 0.0;
            let mut m2 = 0.0;
            for seed in 0..n {
                let omega = sample_sequence(&spec, depth as usize, seed).unwrap();
                let total = trace(kind, 1, &class, &omega).unwrap().total_sq_err();
                let delta = total - mean;
                mean += delta / (seed + 1) as f64;
                m2 += delta * (total - mean);
            }
            let se = (m2 / (n - 1) as f64 / n as f64).sqrt();
            assert!(
                (mean - want).abs() <= 3.0 * se + 1e-12,
                "{kind:?}: monte carlo {mean} vs exact {want} (se {se})"
            );
        }
    }

    #[test]
    fn per_sequence_singleton() {
        let class = ModelClass::new(vec![ClassEntry::new(bern(1, 2), 0)]).unwrap();
        let omega = BitString::repeat(1, 50);
        let rep = per_sequence_bound(&class, 0, &omega, 3.0).unwrap();
        assert_eq!(rep.report.sum, 0.0);
        assert_eq!(rep.selected.len(), 1);
        assert_eq!(rep.selected[0].id, 0);
        assert_eq!(rep.selected[0].last_selected_step, 49);
        assert!(rep.report.pass);
        assert!(rep.cutoff_holds);
        assert!(rep.count_ok);
        // Singleton at code length 0: xi = P, so the chain domination
        // constant is exactly 1 and the term is 8 ln2 (0 + 2), plus the
        // final-step allowance.
        let want = 8.0 * LN_2 * 2.0 + 1.0;
        assert!((rep.report.bound - want).abs() < 1e-9);
    }

    #[test]
    fn per_sequence_two_entry_seeded() {
        let class = two_entry().with_pairwise_averages().unwrap();
        let omega = sample_sequence(&class.entry(1).unwrap().spec, 400, 13).unwrap();
        let rep = per_sequence_bound(&class, 1, &omega, 3.0).unwrap();
        assert!(rep.report.pass, "slack = {}", rep.report.slack);
        assert!(rep.cutoff_holds);
        assert!(rep.count_ok);
        // Selection stays on the original entries.
        assert!(rep.selected.iter().all(|s| s.id < 2));
        assert!(rep.report.deficiency_sup.unwrap() <= 8.0);
    }

    #[test]
    fn per_sequence_needs_pair_entries() {
        let class = two_entry();
        let omega = BitString::repeat(1, 12);
        // The selector flips to bernoulli(3/4) on a long run of ones, so
        // the (0, 1) average is required and missing.
        assert!(matches!(
            per_sequence_bound(&class, 0, &omega, 3.0),
            Err(Error::MissingPairAverage { p: 0, q: 1 })
        ));
    }

    #[test]
    fn per_sequence_rejects_extension_ids_as_truth() {
        let class = two_entry().with_pairwise_averages().unwrap();
        let omega = BitString::repeat(1, 4);
        assert!(matches!(
            per_sequence_bound(&class, 2, &omega, 3.0),
            Err(Error::EntryOutOfRange { id: 2, len: 2 })
        ));
    }

    #[test]
    fn kl_chain_self_prediction_is_exactly_zero() {
        let class = two_entry();
        let rep = kl_chain_check(&class, 1, PredictorKind::Single { entry: 1 }, 8).unwrap();
        assert!(rep.kl.iter().all(|&v| v == 0.0));
        assert_eq!(rep.max_chain_residual, 0.0);
        assert_eq!(rep.sq_sum, 0.0);
        assert_eq!(rep.log2_domination, 0.0);
        assert!(rep.pass);
    }

    #[test]
    fn kl_chain_mixture_two_entry() {
        let class = two_entry();
        for truth in [0usize, 1] {
            let rep = kl_chain_check(&class, truth, PredictorKind::Mixture, 10).unwrap();
            assert!(rep.chain_ok, "residual {}", rep.max_chain_residual);
            assert!(rep.dominated);
            assert!(rep.pinsker_ok);
            assert!(rep.pass);
            // Mixture domination: P/M <= 2^L_P.
            let l_p = f64::from(class.entries()[truth].code_length);
            assert!(
                rep.log2_domination <= l_p + 1e-9,
                "{} > {}",
                rep.log2_domination,
                l_p
            );
            // KL grows with depth against a non-degenerate mismatch.
            for w in rep.kl.windows(2) {
                assert!(w[1] >= w[0] - 1e-12);
            }
        }
    }

    #[test]
    fn kl_chain_mdl_two_entry() {
        let class = two_entry();
        let rep = kl_chain_check(&class, 1, PredictorKind::Mdl { gamma: 3.0 }, 8).unwrap();
        assert!(rep.pass, "chain {:?}", rep.max_chain_residual);
        assert!(rep.kl[8] > 0.0);
    }

    #[test]
    fn kl_chain_depth_cap() {
        let class = two_entry();
        assert!(matches!(
            kl_chain_check(&class, 0, PredictorKind::Mixture, 17),
            Err(Error::DepthLimit { depth: 17, max: 16 })
        ));
    }

    #[test]
    fn bound_values_examples() {
        assert!((bound_values(0, 0.0, 3.0) - 2.0f64.sqrt()).abs() < 1e-12);
        assert_eq!(bound_values(3, -4.0, 3.0), 0.0);
        assert_eq!(bound_values(0, -1.0, 2.0), 0.0);
    }

    #[test]
    fn shell_check_binomial_limits() {
        // 100 suprema, none reaching 1: every tail is empty and passes.
        let sups = vec![0.3; 100];
        let hist = shell_check(&sups, 6).unwrap();
        assert!(hist.pass);
        assert!(hist.bins.iter().all(|b| b.count == 0));
        // All suprema at 5: the d = 5 tail has frequency 1, far above
        // 2^-5 + 3 SE.
        let sups = vec![5.0; 100];
        let hist = shell_check(&sups, 6).unwrap();
        assert!(!hist.pass);
        assert!(!hist.bins[4].ok);
        assert_eq!(hist.bins[4].count, 100);
        assert!(hist.bins[5].ok, "tail at 6 is empty");
        assert!(matches!(shell_check(&[], 4), Err(Error::EmptyInput)));
    }

    fn extended_class() -> ModelClass {
        ModelClass::new(vec![
            ClassEntry::new(bern(1, 3), 3),
            ClassEntry::new(bern(1, 2), 3),
            ClassEntry::new(bern(5, 6), 3),
        ])
        .unwrap()
        .with_pairwise_averages()
        .unwrap()
    }

    proptest! {
        #[test]
        fn vovk_passes_on_sampled_pairs(
            p_id in 0usize..3,
            q_id in 0usize..3,
            seed in 0u64..200,
            n in 0usize..=64,
        ) {
            let class = extended_class();
            let spec = class.entry(p_id).unwrap().spec.clone();
            let x = sample_sequence(&spec, n, seed).unwrap();
            let rep = vovk_bound_check(&class, p_id, q_id, &x).unwrap();
            prop_assert!(rep.pass, "slack {}", rep.slack);
            prop_assert!(rep.sum >= 0.0);
        }

        #[test]
        fn expected_error_nondecreasing_in_depth(
            theta_n in 1u64..8,
            pick in 0usize..3,
        ) {
            let class = two_entry();
            let kind = match pick {
                0 => PredictorKind::Mdl { gamma: 3.0 },
                1 => PredictorKind::Mixture,
                _ => PredictorKind::Single { entry: 1 },
            };
            let truth = usize::from(theta_n % 2 == 0);
            let mut prev = 0.0;
            for depth in 0..=6 {
                let e = expected_sq_error(&class, truth, kind, depth).unwrap();
                prop_assert!(e >= prev - 1e-15, "depth {depth}: {e} < {prev}");
                prev = e;
            }
        }

        #[test]
        fn per_sequence_holds_on_sampled_sequences(
            truth in 0usize..3,
            seed in 0u64..100,
        ) {
            let class = extended_class();
            let omega = sample_sequence(
                &class.entry(truth).unwrap().spec, 256, seed,
            ).unwrap();
            let rep = per_sequence_bound(&class, truth, &omega, 3.0).unwrap();
            prop_assert!(rep.report.pass, "slack {}", rep.report.slack);
            prop_assert!(rep.cutoff_holds);
            prop_assert!(rep.count_ok);
        }

        #[test]
        fn kl_chain_holds_on_random_classes(
            thetas in proptest::collection::vec((1u64..16, 1u64..16), 1..=3),
            truth_raw in 0usize..3,
            pick in 0usize..2,
        ) {
            let entries: Vec<ClassEntry> = thetas
                .iter()
                .map(|&(n, d)| {
                    let d = d.max(2);
                    ClassEntry::new(bern(n.min(d - 1).max(1), d), 2)
                })
                .collect();
            let class = ModelClass::new(entries).unwrap();
            let truth = truth_raw % class.len();
            let kind = if pick == 0 {
                PredictorKind::Mixture
            } else {
                PredictorKind::Mdl { gamma: 3.0 }
            };
            let rep = kl_chain_check(&class, truth, kind, 6).unwrap();
            prop_assert!(rep.chain_ok, "residual {}", rep.max_chain_residual);
            prop_assert!(rep.dominated);
            prop_assert!(rep.pinsker_ok);
        }

        #[test]
        fn bound_values_monotone(l in 0u32..6, d_steps in 0u32..12, gamma_pick in 0usize..2) {
            let gamma = if gamma_pick == 0 { 3.0 } else { 1.5 };
            let l_f = f64::from(l);
            let d = -l_f - 1.0 + f64::from(d_steps) * 0.5;
            prop_assert!(bound_values(l, d, gamma) <= bound_values(l + 1, d, gamma) + 1e-12);
            prop_assert!(bound_values(l, d, gamma) <= bound_values(l, d + 0.5, gamma) + 1e-12);
            prop_assert!(bound_values(l, d, gamma) >= 0.0);
        }
    }
}
