//! Measures and semimeasures on the binary tree, given by cylinder masses.
//!
//! A measure assigns mass 1 to the empty string and splits mass exactly:
//! P(x0) + P(x1) = P(x). A semimeasure may lose mass: S(x0) + S(x1) <= S(x).
//! Four parametric families are provided:
//!
//! * `bernoulli(theta)` - i.i.d. bits, P(next = 1) = theta;
//! * `markov1(theta0, theta1, theta_init)` - order-1 chain, P(next = 1 |
//!   prev = b) = theta_b, first bit from theta_init;
//! * `interval(alpha, precision_bits)` - the restriction of the uniform
//!   measure to (0, alpha): the mass of x is the Lebesgue measure of
//!   [0.x, 0.x + 2^-|x|) intersected with (0, alpha). alpha is dyadic and
//!   evaluation is refused at depths >= precision_bits, so every returned
//!   value is exact. This family is a semimeasure: the whole defect sits at
//!   the root (mass of the empty string is alpha), children always split
//!   their parent's mass exactly.
//! * `average(left, right)` - the measure whose conditional at every node is
//!   the arithmetic mean of the two components' conditionals.
//!
//! The parametric conditionals of bernoulli/markov1 are total functions of
//! the previous bit, so any nest of averages over them collapses exactly to
//! a single order-1 chain with averaged parameters; evaluation runs on the
//! collapsed form with O(1) state per step and exact rational masses
//! recovered on demand from transition counts.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::numkernel::{big_rational_to_f64, format_ratio, log2_rational, parse_ratio, LogProb};

/// A finite binary string; bit values are stored as 0/1 bytes.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct BitString {
    bits: Vec<u8>,
}

impl BitString {
    pub fn empty() -> Self {
        BitString::default()
    }

    pub fn from_bits(bits: Vec<u8>) -> Self {
        assert!(bits.iter().all(|&b| b <= 1), "bits must be 0 or 1");
        BitString { bits }
    }

    /// n copies of the same bit, e.g. the "111...1" test sequences.
    pub fn repeat(bit: u8, n: usize) -> Self {
        assert!(bit <= 1);
        BitString { bits: vec![bit; n] }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bit(&self, i: usize) -> u8 {
        self.bits[i]
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn push(&mut self, bit: u8) {
        assert!(bit <= 1, "bits must be 0 or 1");
        self.bits.push(bit);
    }

    pub fn prefix(&self, len: usize) -> BitString {
        assert!(len <= self.len());
        BitString {
            bits: self.bits[..len].to_vec(),
        }
    }

    /// All prefixes x1..xi as slices, for i = 0..=n.
    pub fn prefixes(&self) -> impl Iterator<Item = &[u8]> + '_ {
        (0..=self.len()).map(move |i| &self.bits[..i])
    }

    pub fn ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            write!(f, "{}", b)?;
        }
        Ok(())
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut bits = Vec::with_capacity(s.len());
        for c in s.chars() {
            match c {
                '0' => bits.push(0),
                '1' => bits.push(1),
                _ => {
                    return Err(Error::ParameterRange {
                        name: "bit string",
                        value: s.into(),
                    })
                }
            }
        }
        Ok(BitString { bits })
    }
}

impl Serialize for BitString {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// An arbitrary-precision rational confined to [0, 1], reduced.
///
/// Probability parameters live here; 0 and 1 are allowed so point masses
/// like bernoulli(1) are expressible.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct UnitRational(BigRational);

impl UnitRational {
    pub fn new(r: BigRational) -> Result<Self> {
        if r < BigRational::zero() || r > BigRational::one() {
            return Err(Error::ParameterRange {
                name: "probability",
                value: format_ratio(&r),
            });
        }
        Ok(UnitRational(r))
    }

    pub fn from_u64(numer: u64, denom: u64) -> Result<Self> {
        if denom == 0 {
            return Err(Error::ParameterRange {
                name: "probability",
                value: format!("{numer}/0"),
            });
        }
        Self::new(BigRational::new(BigInt::from(numer), BigInt::from(denom)))
    }

    pub fn zero() -> Self {
        UnitRational(BigRational::zero())
    }

    pub fn one() -> Self {
        UnitRational(BigRational::one())
    }

    pub fn as_ratio(&self) -> &BigRational {
        &self.0
    }

    pub fn to_f64(&self) -> f64 {
        big_rational_to_f64(&self.0)
    }

    /// 1 - theta, still inside [0, 1].
    pub fn complement(&self) -> UnitRational {
        UnitRational(BigRational::one() - &self.0)
    }

    /// (theta + other) / 2, the conditional of an averaged measure.
    pub fn midpoint(&self, other: &UnitRational) -> UnitRational {
        UnitRational((&self.0 + &other.0) / BigRational::from(BigInt::from(2)))
    }
}

impl fmt::Display for UnitRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", format_ratio(&self.0))
    }
}

impl FromStr for UnitRational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let r = parse_ratio(s).ok_or_else(|| Error::ParameterRange {
            name: "probability",
            value: s.into(),
        })?;
        Self::new(r)
    }
}

impl Serialize for UnitRational {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for UnitRational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// Family tag and parameters; rationals serialize as "num/den" strings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "snake_case")]
pub enum Family {
    Bernoulli {
        theta: UnitRational,
    },
    Markov1 {
        theta0: UnitRational,
        theta1: UnitRational,
        theta_init: UnitRational,
    },
    Interval {
        alpha: UnitRational,
        precision_bits: u32,
    },
    Average {
        left: Box<MeasureSpec>,
        right: Box<MeasureSpec>,
    },
}

/// A measure or semimeasure description: a family plus an optional display
/// name. Immutable once built; evaluation never mutates a spec.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasureSpec {
    #[serde(flatten)]
    pub family: Family,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

impl MeasureSpec {
    pub fn bernoulli(theta: UnitRational) -> Self {
        MeasureSpec {
            family: Family::Bernoulli { theta },
            name: None,
        }
    }

    pub fn bernoulli_ratio(numer: u64, denom: u64) -> Result<Self> {
        Ok(Self::bernoulli(UnitRational::from_u64(numer, denom)?))
    }

    pub fn markov1(theta0: UnitRational, theta1: UnitRational, theta_init: UnitRational) -> Self {
        MeasureSpec {
            family: Family::Markov1 {
                theta0,
                theta1,
                theta_init,
            },
            name: None,
        }
    }

    /// The uniform measure restricted to (0, alpha); alpha must be dyadic
    /// with at most `precision_bits` fractional bits and positive.
    pub fn interval(alpha: UnitRational, precision_bits: u32) -> Result<Self> {
        let spec = MeasureSpec {
            family: Family::Interval {
                alpha,
                precision_bits,
            },
            name: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    /// True when the spec defines a measure (no interval family inside).
    pub fn is_measure(&self) -> bool {
        match &self.family {
            Family::Bernoulli { .. } | Family::Markov1 { .. } => true,
            Family::Interval { .. } => false,
            Family::Average { left, right } => left.is_measure() && right.is_measure(),
        }
    }

    /// Checks the structural constraints not already enforced by the types:
    /// interval's alpha is dyadic, positive, and representable within the
    /// precision horizon; averages contain only measures.
    pub fn validate(&self) -> Result<()> {
        match &self.family {
            Family::Bernoulli { .. } | Family::Markov1 { .. } => Ok(()),
            Family::Interval {
                alpha,
                precision_bits,
            } => {
                let r = alpha.as_ratio();
                let denom = r.denom();
                let dyadic = denom.trailing_zeros() == Some(denom.bits() - 1);
                let fits = dyadic && denom.bits() <= u64::from(*precision_bits) + 1;
                if r.is_zero() || !fits || *precision_bits == 0 {
                    return Err(Error::InvalidAlpha {
                        alpha: alpha.to_string(),
                        precision_bits: *precision_bits,
                    });
                }
                Ok(())
            }
            Family::Average { left, right } => {
                left.validate()?;
                right.validate()?;
                if !left.is_measure() || !right.is_measure() {
                    return Err(Error::NotAMeasure);
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for MeasureSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(name) = &self.name {
            return write!(f, "{}", name);
        }
        match &self.family {
            Family::Bernoulli { theta } => write!(f, "bernoulli({})", theta),
            Family::Markov1 {
                theta0,
                theta1,
                theta_init,
            } => write!(f, "markov1({}, {}, {})", theta0, theta1, theta_init),
            Family::Interval {
                alpha,
                precision_bits,
            } => write!(f, "interval({}, {})", alpha, precision_bits),
            Family::Average { left, right } => write!(f, "average({}, {})", left, right),
        }
    }
}

/// The mean-conditional composition of two measures: at every node the new
/// conditional is the arithmetic mean of the components' conditionals.
/// Rejects semimeasure inputs, whose conditionals are not total.
pub fn average_measure(p: &MeasureSpec, q: &MeasureSpec) -> Result<MeasureSpec> {
    if !p.is_measure() || !q.is_measure() {
        return Err(Error::NotAMeasure);
    }
    p.validate()?;
    q.validate()?;
    Ok(MeasureSpec {
        family: Family::Average {
            left: Box::new(p.clone()),
            right: Box::new(q.clone()),
        },
        name: None,
    })
}

/// A cylinder mass carried in both representations: the exact rational and
/// its binary logarithm. exact = 0 if and only if log = -inf.
#[derive(Debug, Clone)]
pub struct ProbValue {
    exact: BigRational,
    log: LogProb,
}

impl ProbValue {
    pub fn from_exact(exact: BigRational) -> Self {
        debug_assert!(exact >= BigRational::zero());
        let log = if exact.is_zero() {
            LogProb::ZERO_PROBABILITY
        } else {
            LogProb::new(log2_rational(&exact))
        };
        ProbValue { exact, log }
    }

    pub fn exact(&self) -> &BigRational {
        &self.exact
    }

    pub fn log2(&self) -> LogProb {
        self.log
    }

    pub fn to_f64(&self) -> f64 {
        big_rational_to_f64(&self.exact)
    }

    pub fn is_zero(&self) -> bool {
        self.exact.is_zero()
    }
}

/// Collapsed order-1 parameters: P(first = 1) and P(next = 1 | prev = b).
/// Every measure family reduces to this form.
#[derive(Debug)]
struct MarkovTables {
    /// Step factors P(bit = b | state), indexed [state][b] with states
    /// 0 = prev bit 0, 1 = prev bit 1, 2 = start.
    factor: [[BigRational; 2]; 3],
    /// log2 of each factor; -inf encodes a zero factor.
    log_factor: [[f64; 2]; 3],
    /// P(next = 1 | state) as f64, for sampling and O(1) conditionals.
    cond1: [f64; 3],
}

const STATE_START: usize = 2;

impl MarkovTables {
    fn new(init: BigRational, p0: BigRational, p1: BigRational) -> Arc<Self> {
        let build = |p: BigRational| -> [BigRational; 2] {
            let q = BigRational::one() - &p;
            [q, p]
        };
        let factor = [build(p0), build(p1), build(init)];
        let log_factor = factor
            .each_ref()
            .map(|pair| pair.each_ref().map(log2_or_neg_inf));
        let cond1 = factor.each_ref().map(|pair| big_rational_to_f64(&pair[1]));
        Arc::new(MarkovTables {
            factor,
            log_factor,
            cond1,
        })
    }
}

fn log2_or_neg_inf(r: &BigRational) -> f64 {
    if r.is_zero() {
        f64::NEG_INFINITY
    } else {
        log2_rational(r)
    }
}

#[derive(Debug, Clone)]
struct MarkovState {
    depth: usize,
    /// Current state index into MarkovTables: prev bit, or start.
    state: usize,
    first: Option<u8>,
    /// Transition counts, indexed [prev][bit]; the first bit is not counted.
    trans: [[usize; 2]; 2],
    zero: bool,
}

impl MarkovState {
    /// log2 of the mass, as counts times factor logs: six roundings total,
    /// independent of the prefix length.
    fn log2_mass(&self, tables: &MarkovTables) -> f64 {
        if self.zero {
            return f64::NEG_INFINITY;
        }
        let mut sum = match self.first {
            None => 0.0,
            Some(b) => tables.log_factor[STATE_START][b as usize],
        };
        for prev in 0..2 {
            for b in 0..2 {
                let count = self.trans[prev][b];
                if count > 0 {
                    sum += count as f64 * tables.log_factor[prev][b];
                }
            }
        }
        sum
    }
}

#[derive(Debug)]
struct IntervalTables {
    /// alpha scaled by 2^precision_bits.
    a: BigInt,
    precision_bits: u32,
    denom: BigInt,
}

#[derive(Debug, Clone)]
struct IntervalState {
    depth: usize,
    /// 0.x scaled by 2^precision_bits.
    lo: BigInt,
    /// Current cylinder mass scaled by 2^precision_bits.
    mass: BigInt,
}

#[derive(Debug, Clone)]
enum EvalInner {
    Markov {
        tables: Arc<MarkovTables>,
        state: MarkovState,
    },
    Interval {
        tables: Arc<IntervalTables>,
        state: IntervalState,
    },
}

/// An incremental evaluator positioned at a node of the binary tree.
///
/// One `step` per observed bit; masses, conditionals and logs refer to the
/// current prefix. Cloning forks the position, which is how tree traversals
/// descend both children.
#[derive(Debug, Clone)]
pub struct Evaluator {
    inner: EvalInner,
}

fn collapse(spec: &MeasureSpec) -> Result<(BigRational, BigRational, BigRational)> {
    match &spec.family {
        Family::Bernoulli { theta } => {
            let t = theta.as_ratio().clone();
            Ok((t.clone(), t.clone(), t))
        }
        Family::Markov1 {
            theta0,
            theta1,
            theta_init,
        } => Ok((
            theta_init.as_ratio().clone(),
            theta0.as_ratio().clone(),
            theta1.as_ratio().clone(),
        )),
        Family::Average { left, right } => {
            let (li, l0, l1) = collapse(left)?;
            let (ri, r0, r1) = collapse(right)?;
            let two = BigRational::from(BigInt::from(2));
            Ok(((li + ri) / &two, (l0 + r0) / &two, (l1 + r1) / &two))
        }
        Family::Interval { .. } => Err(Error::NotAMeasure),
    }
}

impl Evaluator {
    pub fn new(spec: &MeasureSpec) -> Result<Self> {
        spec.validate()?;
        let inner = match &spec.family {
            Family::Interval {
                alpha,
                precision_bits,
            } => {
                let k = *precision_bits;
                let denom = BigInt::one() << u64::from(k);
                let a = (alpha.as_ratio() * BigRational::from(denom.clone()))
                    .to_integer();
                let state = IntervalState {
                    depth: 0,
                    lo: BigInt::zero(),
                    mass: a.clone(),
                };
                EvalInner::Interval {
                    tables: Arc::new(IntervalTables {
                        a,
                        precision_bits: k,
                        denom,
                    }),
                    state,
                }
            }
            _ => {
                let (init, p0, p1) = collapse(spec)?;
                EvalInner::Markov {
                    tables: MarkovTables::new(init, p0, p1),
                    state: MarkovState {
                        depth: 0,
                        state: STATE_START,
                        first: None,
                        trans: [[0; 2]; 2],
                        zero: false,
                    },
                }
            }
        };
        Ok(Evaluator { inner })
    }

    pub fn depth(&self) -> usize {
        match &self.inner {
            EvalInner::Markov { state, .. } => state.depth,
            EvalInner::Interval { state, .. } => state.depth,
        }
    }

    /// True when the spec behind this evaluator is a semimeasure.
    pub fn is_semimeasure(&self) -> bool {
        matches!(self.inner, EvalInner::Interval { .. })
    }

    /// Extends the current prefix by one bit.
    pub fn step(&mut self, bit: u8) -> Result<()> {
        assert!(bit <= 1);
        match &mut self.inner {
            EvalInner::Markov { tables, state } => {
                let b = bit as usize;
                if tables.factor[state.state][b].is_zero() {
                    state.zero = true;
                }
                if state.depth == 0 {
                    state.first = Some(bit);
                } else {
                    state.trans[state.state][b] += 1;
                }
                state.state = b;
                state.depth += 1;
                Ok(())
            }
            EvalInner::Interval { tables, state } => {
                let new_depth = state.depth + 1;
                if new_depth as u64 >= u64::from(tables.precision_bits) {
                    return Err(Error::DepthExceedsPrecision {
                        depth: new_depth,
                        precision_bits: tables.precision_bits,
                    });
                }
                let half = BigInt::one() << (u64::from(tables.precision_bits) - new_depth as u64);
                if bit == 1 {
                    state.lo += &half;
                }
                let hi = &state.lo + &half;
                state.mass = min_bigint(&hi, &tables.a) - min_bigint(&state.lo, &tables.a);
                state.depth = new_depth;
                Ok(())
            }
        }
    }

    /// Exact mass of the current prefix, rebuilt from counts on demand.
    pub fn exact_mass(&self) -> BigRational {
        match &self.inner {
            EvalInner::Markov { tables, state } => {
                if state.zero {
                    return BigRational::zero();
                }
                let mut mass = match state.first {
                    None => return BigRational::one(),
                    Some(b) => tables.factor[STATE_START][b as usize].clone(),
                };
                for prev in 0..2 {
                    for b in 0..2 {
                        let count = state.trans[prev][b];
                        if count > 0 {
                            mass *= num::pow::pow(tables.factor[prev][b].clone(), count);
                        }
                    }
                }
                mass
            }
            EvalInner::Interval { tables, state } => {
                BigRational::new(state.mass.clone(), tables.denom.clone())
            }
        }
    }

    /// log2 of the current mass; -inf when the mass is zero. Recovered from
    /// transition counts in O(1), so the rounding error does not grow with
    /// the prefix length.
    pub fn log2_mass(&self) -> f64 {
        match &self.inner {
            EvalInner::Markov { tables, state } => state.log2_mass(tables),
            EvalInner::Interval { tables, state } => {
                if state.mass.is_zero() {
                    f64::NEG_INFINITY
                } else {
                    log2_rational(&BigRational::new(state.mass.clone(), tables.denom.clone()))
                }
            }
        }
    }

    /// Exact zero test for the current mass (no float involved).
    pub fn is_zero(&self) -> bool {
        match &self.inner {
            EvalInner::Markov { state, .. } => state.zero,
            EvalInner::Interval { state, .. } => state.mass.is_zero(),
        }
    }

    /// Exact conditional probability of the next bit.
    ///
    /// For chain families the conditional is the parametric formula, which
    /// is total even off the support; interval conditionals are mass ratios
    /// and require positive context mass.
    pub fn cond_exact(&self, bit: u8) -> Result<BigRational> {
        assert!(bit <= 1);
        match &self.inner {
            EvalInner::Markov { tables, state } => {
                Ok(tables.factor[state.state][bit as usize].clone())
            }
            EvalInner::Interval { tables, state } => {
                if state.mass.is_zero() {
                    return Err(Error::ZeroContext {
                        context: format!("<interval node at depth {}>", state.depth),
                    });
                }
                let child = self.interval_child_mass(tables, state, bit)?;
                Ok(BigRational::new(child, state.mass.clone()))
            }
        }
    }

    /// Both next-bit conditionals as f64. For measures the two values sum
    /// to exactly 1.0: the 1-side is rounded from the exact rational and
    /// the 0-side is its one's complement.
    pub fn cond_f64_pair(&self) -> Result<(f64, f64)> {
        match &self.inner {
            EvalInner::Markov { tables, state } => {
                let t = tables.cond1[state.state];
                Ok((1.0 - t, t))
            }
            EvalInner::Interval { .. } => {
                let c0 = big_rational_to_f64(&self.cond_exact(0)?);
                let c1 = big_rational_to_f64(&self.cond_exact(1)?);
                Ok((c0, c1))
            }
        }
    }

    /// Exact mass of the one-bit extension of the current prefix, without
    /// stepping. Total: zero-mass contexts yield zero children.
    pub fn child_mass_exact(&self, bit: u8) -> Result<BigRational> {
        assert!(bit <= 1);
        match &self.inner {
            EvalInner::Markov { tables, state } => {
                if state.zero {
                    return Ok(BigRational::zero());
                }
                Ok(self.exact_mass() * &tables.factor[state.state][bit as usize])
            }
            EvalInner::Interval { tables, state } => {
                let child = self.interval_child_mass(tables, state, bit)?;
                Ok(BigRational::new(child, tables.denom.clone()))
            }
        }
    }

    /// log2 of the one-bit extension's mass; O(1) for chain families.
    pub fn log2_child(&self, bit: u8) -> Result<f64> {
        assert!(bit <= 1);
        match &self.inner {
            EvalInner::Markov { tables, state } => {
                if state.zero {
                    return Ok(f64::NEG_INFINITY);
                }
                Ok(state.log2_mass(tables) + tables.log_factor[state.state][bit as usize])
            }
            EvalInner::Interval { tables, state } => {
                let child = self.interval_child_mass(tables, state, bit)?;
                if child.is_zero() {
                    return Ok(f64::NEG_INFINITY);
                }
                Ok(log2_rational(&BigRational::new(
                    child,
                    tables.denom.clone(),
                )))
            }
        }
    }

    fn interval_child_mass(
        &self,
        tables: &IntervalTables,
        state: &IntervalState,
        bit: u8,
    ) -> Result<BigInt> {
        let child_depth = state.depth + 1;
        if child_depth as u64 >= u64::from(tables.precision_bits) {
            return Err(Error::DepthExceedsPrecision {
                depth: child_depth,
                precision_bits: tables.precision_bits,
            });
        }
        let half = BigInt::one() << (u64::from(tables.precision_bits) - child_depth as u64);
        let lo = if bit == 1 {
            &state.lo + &half
        } else {
            state.lo.clone()
        };
        let hi = &lo + &half;
        Ok(min_bigint(&hi, &tables.a) - min_bigint(&lo, &tables.a))
    }
}

fn min_bigint<'a>(a: &'a BigInt, b: &'a BigInt) -> BigInt {
    if a <= b {
        a.clone()
    } else {
        b.clone()
    }
}

/// Mass of the cylinder [x] under the spec; exact, with its log attached.
///
/// The empty string has mass 1 under measures and alpha under the interval
/// family. Interval evaluation is refused at depth >= precision_bits.
pub fn measure_prob(spec: &MeasureSpec, x: &BitString) -> Result<ProbValue> {
    let mut ev = Evaluator::new(spec)?;
    for &b in x.bits() {
        ev.step(b)?;
    }
    Ok(ProbValue::from_exact(ev.exact_mass()))
}

/// Builds an evaluator positioned at x.
pub fn walk(spec: &MeasureSpec, x: &BitString) -> Result<Evaluator> {
    let mut ev = Evaluator::new(spec)?;
    for &b in x.bits() {
        ev.step(b)?;
    }
    Ok(ev)
}

/// Exact conditional P(b | x) = P(xb)/P(x); requires P(x) > 0.
pub fn cond_prob_exact(spec: &MeasureSpec, x: &BitString, bit: u8) -> Result<BigRational> {
    let ev = walk(spec, x)?;
    if ev.is_zero() {
        return Err(Error::ZeroContext {
            context: x.to_string(),
        });
    }
    ev.cond_exact(bit)
}

/// Conditional P(b | x) as f64.
///
/// For measure specs the two conditionals at any context sum to exactly
/// 1.0 in f64: the 1-side is the correctly rounded exact value, the 0-side
/// its complement.
pub fn cond_prob(spec: &MeasureSpec, x: &BitString, bit: u8) -> Result<f64> {
    let ev = walk(spec, x)?;
    if ev.is_zero() {
        return Err(Error::ZeroContext {
            context: x.to_string(),
        });
    }
    if ev.is_semimeasure() {
        return Ok(big_rational_to_f64(&ev.cond_exact(bit)?));
    }
    let t = big_rational_to_f64(&ev.cond_exact(1)?);
    Ok(if bit == 1 { t } else { 1.0 - t })
}

/// Draws an n-bit sequence from a measure, bit by bit, as a deterministic
/// function of (spec, n, seed). The generator is counter-based (ChaCha12),
/// so identical inputs reproduce identical outputs on every platform.
pub fn sample_sequence(spec: &MeasureSpec, n: usize, seed: u64) -> Result<BitString> {
    if !spec.is_measure() {
        return Err(Error::NotAMeasure);
    }
    spec.validate()?;
    let (init, p0, p1) = collapse(spec)?;
    let cond1 = [
        big_rational_to_f64(&p0),
        big_rational_to_f64(&p1),
        big_rational_to_f64(&init),
    ];
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut out = BitString::empty();
    let mut state = STATE_START;
    for _ in 0..n {
        let r: f64 = rng.gen();
        let bit = u8::from(r < cond1[state]);
        out.push(bit);
        state = bit as usize;
    }
    Ok(out)
}
