//! Exact and log-domain arithmetic plus the analytic inequalities used by
//! the bound checks: the logarithm convexity gap, its n-term aggregate, and
//! the Bernoulli Kullback-Leibler divergence with its Pinsker lower bound.
//!
//! All logarithms are binary. The convexity gap satisfies
//!
//! ```text
//! log2((p+q)/2) - (log2 p + log2 q)/2  >=  (p-q)^2 / (8 ln 2)
//! ```
//!
//! for p, q in (0, 1], and summing the gap over n coordinates turns the
//! mean/geometric product ratio c into the explicit bound
//! sum_i (p_i - q_i)^2 <= 4 ln2 log2 c.

use std::f64::consts::LN_2;
use std::fmt;
use std::str::FromStr;

use num::bigint::{BigInt, Sign};
use num::rational::BigRational;
use num::{One, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::report::BoundReport;

/// A strictly positive arbitrary-precision rational, kept in reduced form.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PosRational(BigRational);

impl PosRational {
    pub fn new(numer: BigInt, denom: BigInt) -> Result<Self> {
        if denom.is_zero() {
            return Err(Error::ParameterRange {
                name: "denominator",
                value: "0".into(),
            });
        }
        let r = BigRational::new(numer, denom);
        Self::from_ratio(r)
    }

    pub fn from_ratio(r: BigRational) -> Result<Self> {
        if r <= BigRational::zero() {
            return Err(Error::ParameterRange {
                name: "rational",
                value: format_ratio(&r),
            });
        }
        Ok(PosRational(r))
    }

    pub fn from_u64(numer: u64, denom: u64) -> Result<Self> {
        Self::new(BigInt::from(numer), BigInt::from(denom))
    }

    pub fn one() -> Self {
        PosRational(BigRational::one())
    }

    pub fn as_ratio(&self) -> &BigRational {
        &self.0
    }

    pub fn into_ratio(self) -> BigRational {
        self.0
    }

    pub fn to_f64(&self) -> f64 {
        big_rational_to_f64(&self.0)
    }
}

impl fmt::Display for PosRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", format_ratio(&self.0))
    }
}

impl FromStr for PosRational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let r = parse_ratio(s).ok_or_else(|| Error::ParameterRange {
            name: "rational",
            value: s.into(),
        })?;
        Self::from_ratio(r)
    }
}

impl Serialize for PosRational {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PosRational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// Parses "num/den" (or a bare integer) into a reduced rational.
pub fn parse_ratio(s: &str) -> Option<BigRational> {
    let s = s.trim();
    let (numer, denom) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n = BigInt::from_str(numer).ok()?;
    let d = BigInt::from_str(denom).ok()?;
    if d.is_zero() {
        return None;
    }
    Some(BigRational::new(n, d))
}

/// Formats a rational as "num/den" in reduced form.
pub fn format_ratio(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Binary logarithm of a probability; `-inf` encodes probability zero.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct LogProb(f64);

impl LogProb {
    pub const ZERO_PROBABILITY: LogProb = LogProb(f64::NEG_INFINITY);

    pub fn new(log2_value: f64) -> Self {
        LogProb(log2_value)
    }

    /// The log2 value itself (bits are its negation for probabilities).
    pub fn value(&self) -> f64 {
        self.0
    }

    pub fn is_zero_probability(&self) -> bool {
        self.0 == f64::NEG_INFINITY
    }
}

impl fmt::Display for LogProb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// ldexp with a split exponent so intermediate powers stay representable.
fn scale_by_pow2(x: f64, e: i64) -> f64 {
    if e == 0 || x == 0.0 {
        return x;
    }
    let e = e.clamp(-4200, 4200) as i32;
    let h = e / 2;
    x * 2f64.powi(h) * 2f64.powi(e - h)
}

/// Nearest-ish f64 for an arbitrary-precision rational.
///
/// Extracts ~63 significant bits by integer shifting, so the relative error
/// is below 2^-52 whenever the value is inside the f64 range; values beyond
/// the range saturate to 0 or infinity.
pub fn big_rational_to_f64(r: &BigRational) -> f64 {
    let numer = r.numer();
    if numer.is_zero() {
        return 0.0;
    }
    let negative = numer.sign() == Sign::Minus;
    let p = numer.magnitude();
    let q = r.denom().magnitude();
    let shift = 63i64 - (p.bits() as i64 - q.bits() as i64);
    let m = if shift >= 0 {
        (p << shift as u64) / q
    } else {
        p / (q << (-shift) as u64)
    };
    let mf = m.to_u128().map(|v| v as f64).unwrap_or(f64::INFINITY);
    let out = scale_by_pow2(mf, -shift);
    if negative {
        -out
    } else {
        out
    }
}

/// Largest e with 2^e <= r, for a positive rational r. Exact: the only
/// arithmetic is integer shifting and comparison, so ceiling/floor decisions
/// at power-of-two boundaries are never subject to float rounding.
pub fn floor_log2(r: &BigRational) -> i64 {
    debug_assert!(r > &BigRational::zero());
    floor_log2_ratio(r.numer(), r.denom())
}

/// Largest e with 2^e <= n/d, for positive n, d. Exact.
fn floor_log2_ratio(n: &BigInt, d: &BigInt) -> i64 {
    let e0 = n.bits() as i64 - d.bits() as i64;
    let at_most = |e: i64| -> bool {
        // 2^e <= n/d
        if e >= 0 {
            (d << e as u64) <= *n
        } else {
            *d <= (n << (-e) as u64)
        }
    };
    if at_most(e0) {
        e0
    } else {
        e0 - 1
    }
}

fn is_power_of_two(x: &BigInt) -> bool {
    x.trailing_zeros() == Some(x.bits() - 1)
}

/// Binary logarithm of a positive rational.
///
/// Exact on powers of two. Elsewhere the value is split as e + log2(s) with
/// s in [1,2) recovered through ln_1p on an exactly computed remainder, so
/// no cancellation occurs near 1 and the relative error stays below 2^-50.
pub fn log2_rational(r: &BigRational) -> f64 {
    debug_assert!(r > &BigRational::zero());
    let n = r.numer();
    let d = r.denom();
    if n == d {
        return 0.0;
    }
    if is_power_of_two(n) && is_power_of_two(d) {
        return (n.bits() as i64 - d.bits() as i64) as f64;
    }
    let e = floor_log2_ratio(n, d);
    if e == 0 || e == -1 {
        // r in (1/2, 2): evaluate log2(1 + (r-1)) directly.
        let u = BigRational::new(n - d, d.clone());
        return big_rational_to_f64(&u).ln_1p() / LN_2;
    }
    // s = r / 2^e in [1, 2); u = s - 1 in [0, 1).
    let (num2, den2) = if e >= 0 {
        (n.clone(), d << e as u64)
    } else {
        (n << (-e) as u64, d.clone())
    };
    let u = BigRational::new(num2 - &den2, den2);
    e as f64 + big_rational_to_f64(&u).ln_1p() / LN_2
}

/// log2 of a strictly positive rational, packaged as a [`LogProb`].
pub fn log2_of(r: &PosRational) -> LogProb {
    LogProb::new(log2_rational(r.as_ratio()))
}

fn check_unit_interval(name: &'static str, v: f64) -> Result<()> {
    if !(v > 0.0 && v <= 1.0) {
        return Err(Error::OutOfUnitInterval { name, value: v });
    }
    Ok(())
}

/// Convexity gap of the binary logarithm at (p, q):
/// log2((p+q)/2) - (log2 p + log2 q)/2.
///
/// Guaranteed >= (p-q)^2 / (8 ln 2) on (0,1]^2.
pub fn convex_gap(p: f64, q: f64) -> Result<f64> {
    check_unit_interval("p", p)?;
    check_unit_interval("q", q)?;
    Ok((0.5 * (p + q)).log2() - 0.5 * (p.log2() + q.log2()))
}

/// Lower bound the gap is checked against, (p-q)^2 / (8 ln 2).
pub fn convex_gap_floor(p: f64, q: f64) -> f64 {
    (p - q) * (p - q) / (8.0 * LN_2)
}

/// Aggregated convexity check over two vectors in (0,1]^n.
///
/// Computes c = (prod (p_i+q_i)/2)^2 / prod p_i q_i in the log domain and
/// reports the measured sum of squared differences against the explicit
/// bound 4 ln2 log2 c.
pub fn convexn_check(ps: &[f64], qs: &[f64]) -> Result<BoundReport> {
    if ps.len() != qs.len() {
        return Err(Error::LengthMismatch {
            left: ps.len(),
            right: qs.len(),
        });
    }
    if ps.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut sum = 0.0;
    let mut log2_c = 0.0;
    for (&p, &q) in ps.iter().zip(qs) {
        sum += (p - q) * (p - q);
        log2_c += 2.0 * convex_gap(p, q)?;
    }
    let bound = 4.0 * LN_2 * log2_c;
    let mut report = BoundReport::new(sum, bound);
    report.log2_mean_ratio = Some(log2_c);
    Ok(report)
}

/// Bernoulli Kullback-Leibler divergence in bits,
/// p log2(p/q) + (1-p) log2((1-p)/(1-q)), with the 0 log 0 = 0 convention.
pub fn kl_bernoulli(p: f64, q: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidProbability(p));
    }
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::DegenerateReference(q));
    }
    let mut kl = 0.0;
    if p > 0.0 {
        kl += p * (p / q).log2();
    }
    if p < 1.0 {
        kl += (1.0 - p) * ((1.0 - p) / (1.0 - q)).log2();
    }
    // Non-negative by Gibbs; guard the last ulp.
    Ok(kl.max(0.0))
}

/// Pinsker floor for the Bernoulli divergence, (2/ln 2)(p-q)^2.
pub fn pinsker_floor(p: f64, q: f64) -> f64 {
    2.0 / LN_2 * (p - q) * (p - q)
}
