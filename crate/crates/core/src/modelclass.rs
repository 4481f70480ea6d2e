//! Finite Kraft-coded model classes and the quantities built on their
//! mixture: a priori complexity and randomness deficiency.
//!
//! A class is an ordered list of (spec, code length) entries with
//! sum 2^-L <= 1, standing in for "all computable measures, weighted by
//! prefix complexity". Its mixture
//!
//! ```text
//! xi(x) = sum_Q 2^-L(Q) * Q(x)
//! ```
//!
//! is a semimeasure dominating every entry, the surrogate of the universal
//! semimeasure. On top of it sit the a priori complexity
//! KA(x) = ceil(-log2 xi(x)), taken with an exact rational comparison so
//! power-of-two boundaries never depend on float rounding, and the
//! randomness deficiency d(x|P) = -log2 P(x) - KA(x), which is bounded
//! below by -L(P) - 1 for every entry.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{BitString, Evaluator, MeasureSpec, ProbValue};
use crate::numkernel::{floor_log2, format_ratio};

/// One class member: a spec plus its declared prefix-code length in bits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassEntry {
    #[serde(flatten)]
    pub spec: MeasureSpec,
    pub code_length: u32,
}

impl ClassEntry {
    pub fn new(spec: MeasureSpec, code_length: u32) -> Self {
        ClassEntry { spec, code_length }
    }
}

/// An immutable, validated model class. Entry ids are list positions.
#[derive(Debug, Clone)]
pub struct ModelClass {
    entries: Vec<ClassEntry>,
    /// Number of original entries; pairwise-average extensions follow.
    base_len: usize,
    /// (i, j) with i < j mapped to the id of the entry holding average(i, j).
    pairs: Vec<((usize, usize), usize)>,
}

impl ModelClass {
    /// Validates every spec, the Kraft inequality (exactly, in rationals),
    /// and non-emptiness.
    pub fn new(entries: Vec<ClassEntry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyClass);
        }
        for (index, entry) in entries.iter().enumerate() {
            entry.spec.validate().map_err(|e| Error::ClassEntry {
                index,
                reason: e.to_string(),
            })?;
        }
        let class = ModelClass {
            entries,
            base_len: 0,
            pairs: Vec::new(),
        };
        let class = ModelClass {
            base_len: class.entries.len(),
            ..class
        };
        class.check_kraft()?;
        Ok(class)
    }

    fn check_kraft(&self) -> Result<()> {
        let sum = self.kraft_sum();
        if sum > BigRational::one() {
            return Err(Error::KraftViolation {
                sum: format_ratio(&sum),
            });
        }
        Ok(())
    }

    /// Exact sum of 2^-L over all entries.
    pub fn kraft_sum(&self) -> BigRational {
        self.entries
            .iter()
            .map(|e| entry_weight(e.code_length))
            .sum()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Number of original entries (ids below this are not averaged pairs).
    pub fn base_len(&self) -> usize {
        self.base_len
    }

    pub fn entries(&self) -> &[ClassEntry] {
        &self.entries
    }

    pub fn entry(&self, id: usize) -> Result<&ClassEntry> {
        self.entries.get(id).ok_or(Error::EntryOutOfRange {
            id,
            len: self.entries.len(),
        })
    }

    /// Id of the entry holding average(p, q), if the class was extended.
    pub fn pair_entry(&self, p: usize, q: usize) -> Option<usize> {
        let key = (p.min(q), p.max(q));
        self.pairs
            .iter()
            .find(|(pair, _)| *pair == key)
            .map(|&(_, id)| id)
    }

    /// Extends the class with average(P, Q) for every unordered pair of
    /// measure entries, at code length L(P) + L(Q) + 2 (two bits to delimit
    /// the pair). The extension makes the mixture dominate each averaged
    /// measure, which is what the error-bound chain checks exercise.
    pub fn with_pairwise_averages(&self) -> Result<ModelClass> {
        assert!(
            self.pairs.is_empty() && self.base_len == self.entries.len(),
            "class is already pair-extended"
        );
        let mut entries = self.entries.clone();
        let mut pairs = Vec::new();
        for i in 0..self.base_len {
            if !self.entries[i].spec.is_measure() {
                continue;
            }
            for j in (i + 1)..self.base_len {
                if !self.entries[j].spec.is_measure() {
                    continue;
                }
                let spec = crate::measures::average_measure(
                    &self.entries[i].spec,
                    &self.entries[j].spec,
                )?;
                let code_length = self.entries[i].code_length + self.entries[j].code_length + 2;
                pairs.push(((i, j), entries.len()));
                entries.push(ClassEntry { spec, code_length });
            }
        }
        let class = ModelClass {
            entries,
            base_len: self.base_len,
            pairs,
        };
        class.check_kraft()?;
        Ok(class)
    }
}

/// Exact mixture weight 2^-L of a code length.
pub fn entry_weight(code_length: u32) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::one() << u64::from(code_length))
}

/// Relative width of the band around integer values of -log2 xi inside
/// which the a priori complexity falls back to the exact rational ceiling.
/// Away from the band, the O(1)-error float value determines the ceiling
/// with certainty.
const KA_EXACT_BAND: f64 = 1e-6;

/// A mixture evaluator positioned at a node: one measure evaluator per
/// entry, advanced in lockstep. Cloning forks the position.
#[derive(Debug, Clone)]
pub struct MixtureWalker<'c> {
    class: &'c ModelClass,
    evals: Vec<Evaluator>,
    context: BitString,
}

impl<'c> MixtureWalker<'c> {
    pub fn new(class: &'c ModelClass) -> Result<Self> {
        let evals = class
            .entries
            .iter()
            .map(|e| Evaluator::new(&e.spec))
            .collect::<Result<Vec<_>>>()?;
        Ok(MixtureWalker {
            class,
            evals,
            context: BitString::empty(),
        })
    }

    pub fn class(&self) -> &'c ModelClass {
        self.class
    }

    pub fn depth(&self) -> usize {
        self.context.len()
    }

    pub fn context(&self) -> &BitString {
        &self.context
    }

    pub fn evaluator(&self, id: usize) -> &Evaluator {
        &self.evals[id]
    }

    /// Advances every entry by one observed bit.
    pub fn step(&mut self, bit: u8) -> Result<()> {
        for ev in &mut self.evals {
            ev.step(bit)?;
        }
        self.context.push(bit);
        Ok(())
    }

    /// log2(2^-L_i * Q_i(x)) for one entry; -inf when Q_i(x) = 0.
    pub fn log2_weighted(&self, id: usize) -> f64 {
        self.evals[id].log2_mass() - f64::from(self.class.entries[id].code_length)
    }

    /// log2 xi(x) by log-sum-exp over the weighted entry masses.
    pub fn log2_xi(&self) -> f64 {
        let terms: Vec<f64> = (0..self.evals.len())
            .map(|id| self.log2_weighted(id))
            .collect();
        let top = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if top == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        let sum: f64 = terms.iter().map(|a| (a - top).exp2()).sum();
        top + sum.log2()
    }

    /// Exact xi(x) = sum 2^-L_i Q_i(x).
    pub fn exact_xi(&self) -> BigRational {
        let mut sum = BigRational::zero();
        for (entry, ev) in self.class.entries.iter().zip(&self.evals) {
            if !ev.is_zero() {
                sum += entry_weight(entry.code_length) * ev.exact_mass();
            }
        }
        sum
    }

    /// Exact xi(xb) without stepping.
    pub fn exact_child_xi(&self, bit: u8) -> Result<BigRational> {
        let mut sum = BigRational::zero();
        for (entry, ev) in self.class.entries.iter().zip(&self.evals) {
            if !ev.is_zero() {
                sum += entry_weight(entry.code_length) * ev.child_mass_exact(bit)?;
            }
        }
        Ok(sum)
    }

    /// Exact a priori complexity ceil(-log2 xi(x)).
    pub fn ka_exact(&self) -> Result<i64> {
        let xi = self.exact_xi();
        if xi.is_zero() {
            return Err(Error::InfiniteComplexity {
                string: self.context.to_string(),
            });
        }
        // ceil(-log2 v) = -floor(log2 v), including at exact powers of two.
        Ok(-floor_log2(&xi))
    }

    /// A priori complexity with a float fast path: the exact ceiling is
    /// consulted only when -log2 xi lands within KA_EXACT_BAND of an
    /// integer, where rounding could tip the value.
    pub fn ka(&self) -> Result<i64> {
        let log2_xi = self.log2_xi();
        if log2_xi == f64::NEG_INFINITY {
            return Err(Error::InfiniteComplexity {
                string: self.context.to_string(),
            });
        }
        let v = -log2_xi;
        if (v - v.round()).abs() <= KA_EXACT_BAND {
            return self.ka_exact();
        }
        Ok(v.ceil() as i64)
    }

    /// Mixture predictive probability xi(xb)/xi(x) as f64, computed as the
    /// posterior-weighted average of entry conditionals.
    pub fn cond_f64(&self, bit: u8) -> Result<f64> {
        let log2_xi = self.log2_xi();
        if log2_xi == f64::NEG_INFINITY {
            return Err(Error::ZeroContext {
                context: self.context.to_string(),
            });
        }
        let mut acc = 0.0;
        for (id, ev) in self.evals.iter().enumerate() {
            let weighted = self.log2_weighted(id);
            if weighted == f64::NEG_INFINITY {
                continue;
            }
            let posterior = (weighted - log2_xi).exp2();
            let (c0, c1) = ev.cond_f64_pair()?;
            acc += posterior * if bit == 1 { c1 } else { c0 };
        }
        Ok(acc)
    }
}

/// Mass of x under the class mixture xi, exact with its log attached.
pub fn mixture_prob(class: &ModelClass, x: &BitString) -> Result<ProbValue> {
    let mut walker = MixtureWalker::new(class)?;
    for &b in x.bits() {
        walker.step(b)?;
    }
    Ok(ProbValue::from_exact(walker.exact_xi()))
}

/// A priori complexity KA(x) = ceil(-log2 xi(x)), exact at the boundary.
pub fn apriori_complexity(class: &ModelClass, x: &BitString) -> Result<i64> {
    let mut walker = MixtureWalker::new(class)?;
    for &b in x.bits() {
        walker.step(b)?;
    }
    walker.ka_exact()
}

/// Randomness deficiency d(x|P) = -log2 P(x) - KA(x) of x against entry P.
///
/// Always >= -L(P) - 1: the mixture term 2^-L P(x) alone forces
/// KA(x) <= L(P) - log2 P(x) + 1.
pub fn deficiency(class: &ModelClass, p_entry: usize, x: &BitString) -> Result<f64> {
    let entry = class.entry(p_entry)?;
    let mass = crate::measures::measure_prob(&entry.spec, x)?;
    if mass.is_zero() {
        return Err(Error::ZeroProbability {
            entry: p_entry,
            string: x.to_string(),
        });
    }
    let ka = apriori_complexity(class, x)?;
    Ok(-mass.log2().value() - ka as f64)
}

/// Per-prefix deficiencies along a sequence, with the running supremum.
#[derive(Debug, Clone)]
pub struct DeficiencyReport {
    /// d(x1..xi | P) for i = 0..=n.
    pub per_prefix: Vec<f64>,
    /// Supremum of the per-prefix values.
    pub sup: f64,
    /// Shortest prefix length attaining the supremum.
    pub sup_at: usize,
}

/// Deficiency of every prefix of omega against entry P, plus the running
/// supremum D, the desk-scale surrogate of d(omega | P).
pub fn deficiency_profile(
    class: &ModelClass,
    p_entry: usize,
    omega: &BitString,
) -> Result<DeficiencyReport> {
    let entry = class.entry(p_entry)?;
    let mut pev = Evaluator::new(&entry.spec)?;
    let mut walker = MixtureWalker::new(class)?;
    let mut per_prefix = Vec::with_capacity(omega.len() + 1);
    let mut sup = f64::NEG_INFINITY;
    let mut sup_at = 0usize;
    for i in 0..=omega.len() {
        if i > 0 {
            let bit = omega.bit(i - 1);
            pev.step(bit)?;
            walker.step(bit)?;
        }
        if pev.is_zero() {
            return Err(Error::ZeroProbability {
                entry: p_entry,
                string: omega.prefix(i).to_string(),
            });
        }
        let d = -pev.log2_mass() - walker.ka()? as f64;
        if d > sup {
            sup = d;
            sup_at = i;
        }
        per_prefix.push(d);
    }
    Ok(DeficiencyReport {
        per_prefix,
        sup,
        sup_at,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{sample_sequence, UnitRational};
    use proptest::prelude::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn bern(n: u64, d: u64) -> MeasureSpec {
        MeasureSpec::bernoulli_ratio(n, d).unwrap()
    }

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    /// {bernoulli(1/2) at L=1, bernoulli(3/4) at L=2}.
    fn two_entry() -> ModelClass {
        ModelClass::new(vec![
            ClassEntry::new(bern(1, 2), 1),
            ClassEntry::new(bern(3, 4), 2),
        ])
        .unwrap()
    }

    fn singleton_uniform() -> ModelClass {
        ModelClass::new(vec![ClassEntry::new(bern(1, 2), 0)]).unwrap()
    }

    /// Eight Bernoulli parameters spanning the unit interval, all at L=4,
    /// leaving Kraft slack for the pairwise extension.
    fn reference8() -> ModelClass {
        let thetas = [
            (1u64, 16u64),
            (1, 8),
            (1, 4),
            (1, 3),
            (1, 2),
            (2, 3),
            (7, 8),
            (15, 16),
        ];
        ModelClass::new(
            thetas
                .iter()
                .map(|&(n, d)| ClassEntry::new(bern(n, d), 4))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn mixture_hand_values() {
        let class = two_entry();
        let xi_empty = mixture_prob(&class, &bs("")).unwrap();
        assert_eq!(xi_empty.exact(), &rat(3, 4));
        let xi_one = mixture_prob(&class, &bs("1")).unwrap();
        assert_eq!(xi_one.exact(), &rat(7, 16));
        assert_eq!(xi_one.to_f64(), 0.4375);
    }

    #[test]
    fn singleton_mixture_is_the_entry() {
        let class = singleton_uniform();
        for s in ["", "0", "10", "110101"] {
            let x = bs(s);
            let xi = mixture_prob(&class, &x).unwrap();
            let p = crate::measures::measure_prob(&class.entry(0).unwrap().spec, &x).unwrap();
            assert_eq!(xi.exact(), p.exact());
        }
    }

    #[test]
    fn apriori_complexity_hand_values() {
        let class = singleton_uniform();
        assert_eq!(apriori_complexity(&class, &bs("101")).unwrap(), 3);
        let class = two_entry();
        // xi(empty) = 3/4: -log2 is 0.415, ceiling 1.
        assert_eq!(apriori_complexity(&class, &bs("")).unwrap(), 1);
    }

    #[test]
    fn apriori_complexity_at_power_of_two_boundary() {
        // Entries tuned so xi("") = 1/2 exactly: ceil(-log2) must be 1,
        // not 2, regardless of float noise.
        let class = ModelClass::new(vec![
            ClassEntry::new(bern(1, 2), 2),
            ClassEntry::new(bern(3, 4), 2),
        ])
        .unwrap();
        assert_eq!(class.kraft_sum(), rat(1, 2));
        assert_eq!(apriori_complexity(&class, &bs("")).unwrap(), 1);
        // And the walker's banded fast path agrees.
        let walker = MixtureWalker::new(&class).unwrap();
        assert_eq!(walker.ka().unwrap(), 1);
    }

    #[test]
    fn deficiency_hand_values() {
        let class = singleton_uniform();
        assert_eq!(deficiency(&class, 0, &bs("101")).unwrap(), 0.0);
        let class = two_entry();
        // -log2 P(1) = 1 under bernoulli(1/2); KA("1") = ceil(1.192) = 2.
        let d = deficiency(&class, 0, &bs("1")).unwrap();
        assert!((d - (-1.0)).abs() < 1e-12, "d = {d}");
    }

    #[test]
    fn deficiency_errors() {
        let class = ModelClass::new(vec![
            ClassEntry::new(bern(1, 1), 1),
            ClassEntry::new(bern(1, 2), 1),
        ])
        .unwrap();
        // bernoulli(1) gives "0" probability zero.
        assert!(matches!(
            deficiency(&class, 0, &bs("0")),
            Err(Error::ZeroProbability { entry: 0, .. })
        ));
        assert!(matches!(
            deficiency(&class, 5, &bs("0")),
            Err(Error::EntryOutOfRange { id: 5, len: 2 })
        ));
    }

    #[test]
    fn kraft_checked_exactly() {
        let err = ModelClass::new(vec![
            ClassEntry::new(bern(1, 2), 1),
            ClassEntry::new(bern(1, 4), 1),
            ClassEntry::new(bern(3, 4), 2),
        ])
        .unwrap_err();
        match err {
            Error::KraftViolation { sum } => assert_eq!(sum, "5/4"),
            other => panic!("expected Kraft violation, got {other}"),
        }
        assert!(matches!(
            ModelClass::new(vec![]),
            Err(Error::EmptyClass)
        ));
        // Exactly 1 is allowed.
        assert!(ModelClass::new(vec![
            ClassEntry::new(bern(1, 2), 1),
            ClassEntry::new(bern(3, 4), 1),
        ])
        .is_ok());
    }

    #[test]
    fn pairwise_extension_bookkeeping() {
        let class = two_entry().with_pairwise_averages().unwrap();
        assert_eq!(class.len(), 3);
        assert_eq!(class.base_len(), 2);
        let id = class.pair_entry(0, 1).unwrap();
        assert_eq!(id, 2);
        assert_eq!(class.pair_entry(1, 0), Some(2));
        assert_eq!(class.entry(2).unwrap().code_length, 5);
        // The averaged entry behaves as bernoulli(5/8).
        let avg = &class.entry(2).unwrap().spec;
        assert_eq!(
            crate::measures::measure_prob(avg, &bs("1")).unwrap().exact(),
            &rat(5, 8)
        );
        let reference = reference8().with_pairwise_averages().unwrap();
        assert_eq!(reference.len(), 8 + 28);
        assert!(reference.kraft_sum() <= BigRational::one());
    }

    #[test]
    fn extension_skips_semimeasures() {
        let class = ModelClass::new(vec![
            ClassEntry::new(bern(1, 2), 2),
            ClassEntry::new(
                MeasureSpec::interval(UnitRational::from_u64(1, 2).unwrap(), 8).unwrap(),
                2,
            ),
            ClassEntry::new(bern(3, 4), 2),
        ])
        .unwrap();
        let ext = class.with_pairwise_averages().unwrap();
        // Only the (0, 2) measure pair is added.
        assert_eq!(ext.len(), 4);
        assert_eq!(ext.pair_entry(0, 2), Some(3));
        assert_eq!(ext.pair_entry(0, 1), None);
    }

    #[test]
    fn class_file_json_round_trip() {
        let text = r#"[
            {"family": "bernoulli", "params": {"theta": "1/2"}, "code_length": 1},
            {"family": "bernoulli", "params": {"theta": "3/4"}, "code_length": 2}
        ]"#;
        let entries: Vec<ClassEntry> = serde_json::from_str(text).unwrap();
        let class = ModelClass::new(entries).unwrap();
        assert_eq!(class.kraft_sum(), rat(3, 4));
        let back = serde_json::to_string(class.entries()).unwrap();
        let reparsed: Vec<ClassEntry> = serde_json::from_str(&back).unwrap();
        assert_eq!(reparsed, class.entries());
    }

    #[test]
    fn deficiency_profile_of_own_sample_stays_small() {
        let class = reference8();
        let truth = 5; // bernoulli(2/3)
        let omega = sample_sequence(&class.entry(truth).unwrap().spec, 500, 17).unwrap();
        let report = deficiency_profile(&class, truth, &omega).unwrap();
        assert_eq!(report.per_prefix.len(), 501);
        assert!(report.sup <= 3.0 + 4.0, "sup = {}", report.sup);
        assert!(report.per_prefix.iter().all(|d| *d >= -5.0 - 1e-9));
        assert_eq!(report.sup, report.per_prefix[report.sup_at]);
    }

    #[test]
    fn deficiency_profile_grows_linearly_off_class() {
        // All-ones against bernoulli(1/2): the mixture tracks
        // bernoulli(15/16), so the deficiency grows at about
        // 1 - 0.0931 = 0.9069 bits per step.
        let class = reference8();
        let truth = 4; // bernoulli(1/2)
        let omega = BitString::repeat(1, 500);
        let report = deficiency_profile(&class, truth, &omega).unwrap();
        let slope = (report.per_prefix[500] - report.per_prefix[100]) / 400.0;
        assert!(slope > 0.8, "slope = {slope}");
        assert_eq!(report.sup_at, 500);
    }

    #[test]
    fn singleton_profile_is_ceiling_slack_only() {
        let class = ModelClass::new(vec![ClassEntry::new(bern(2, 3), 0)]).unwrap();
        let omega = sample_sequence(&class.entry(0).unwrap().spec, 300, 3).unwrap();
        let report = deficiency_profile(&class, 0, &omega).unwrap();
        for (i, d) in report.per_prefix.iter().enumerate() {
            assert!(*d > -1.0 - 1e-9 && *d <= 1e-9, "d_{i} = {d}");
        }
    }

    fn arb_class() -> impl Strategy<Value = ModelClass> {
        // Up to 4 bernoulli entries at L=2 keeps Kraft <= 1 automatically.
        proptest::collection::vec((0u64..=32, 1u64..=32), 1..=4).prop_map(|params| {
            ModelClass::new(
                params
                    .into_iter()
                    .map(|(n, d)| {
                        let n = n.min(d);
                        ClassEntry::new(bern(n, d), 2)
                    })
                    .collect(),
            )
            .unwrap()
        })
    }

    fn arb_bits(max_len: usize) -> impl Strategy<Value = BitString> {
        proptest::collection::vec(0u8..2, 0..=max_len).prop_map(BitString::from_bits)
    }

    proptest! {
        #[test]
        fn mixture_dominates_every_entry(class in arb_class(), x in arb_bits(24)) {
            let xi = mixture_prob(&class, &x).unwrap();
            for (id, entry) in class.entries().iter().enumerate() {
                let p = crate::measures::measure_prob(&entry.spec, &x).unwrap();
                let weighted = entry_weight(entry.code_length) * p.exact();
                prop_assert!(
                    xi.exact() >= &weighted,
                    "entry {} not dominated at {:?}", id, x.to_string()
                );
            }
        }

        #[test]
        fn mixture_is_a_semimeasure(class in arb_class(), x in arb_bits(24)) {
            let xi = mixture_prob(&class, &x).unwrap().exact().clone();
            let mut x0 = x.clone();
            x0.push(0);
            let mut x1 = x;
            x1.push(1);
            let s0 = mixture_prob(&class, &x0).unwrap().exact().clone();
            let s1 = mixture_prob(&class, &x1).unwrap().exact().clone();
            prop_assert!(&s0 + &s1 <= xi);
        }

        #[test]
        fn ka_bounded_by_entry_codes(class in arb_class(), x in arb_bits(24)) {
            let xi = mixture_prob(&class, &x).unwrap();
            prop_assume!(!xi.is_zero());
            let ka = apriori_complexity(&class, &x).unwrap();
            for entry in class.entries() {
                let p = crate::measures::measure_prob(&entry.spec, &x).unwrap();
                if p.is_zero() {
                    continue;
                }
                let entry_bits = -floor_log2(p.exact()) + i64::from(entry.code_length);
                prop_assert!(ka <= entry_bits, "KA {} > {}", ka, entry_bits);
            }
        }

        #[test]
        fn deficiency_respects_floor(class in arb_class(), x in arb_bits(24), id_raw in 0usize..4) {
            let id = id_raw % class.len();
            let entry = class.entry(id).unwrap();
            let p = crate::measures::measure_prob(&entry.spec, &x).unwrap();
            prop_assume!(!p.is_zero());
            let d = deficiency(&class, id, &x).unwrap();
            prop_assert!(d >= -(f64::from(entry.code_length)) - 1.0 - 1e-9, "d = {}", d);
        }

        #[test]
        fn exact_and_log_mixture_agree(class in arb_class(), x in arb_bits(24)) {
            let mut walker = MixtureWalker::new(&class).unwrap();
            for &b in x.bits() {
                walker.step(b).unwrap();
            }
            let exact = walker.exact_xi();
            prop_assume!(!exact.is_zero());
            let want = crate::numkernel::log2_rational(&exact);
            let got = walker.log2_xi();
            prop_assert!(
                (got - want).abs() <= 1e-9 * want.abs().max(1.0),
                "{} vs {}", got, want
            );
            // Banded and exact a priori complexity always coincide.
            prop_assert_eq!(walker.ka().unwrap(), walker.ka_exact().unwrap());
        }

        #[test]
        fn mixture_cond_matches_exact_ratio(class in arb_class(), x in arb_bits(16), b in 0u8..2) {
            let mut walker = MixtureWalker::new(&class).unwrap();
            for &bit in x.bits() {
                walker.step(bit).unwrap();
            }
            let xi = walker.exact_xi();
            prop_assume!(!xi.is_zero());
            let exact = walker.exact_child_xi(b).unwrap() / xi;
            let got = walker.cond_f64(b).unwrap();
            let want = crate::numkernel::big_rational_to_f64(&exact);
            prop_assert!((got - want).abs() <= 1e-9, "{} vs {}", got, want);
        }
    }
}
