use serde::{Deserialize, Serialize};

/// Measured-versus-bound record shared by the inequality checks.
///
/// The measured quantities are filled per check; absent ones stay `None`
/// and are skipped in JSON output. `pass` is pinned to
/// `slack >= -SLACK_TOLERANCE` so a report can never claim success while
/// the measured sum exceeds its bound by more than round-off.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundReport {
    /// Domination constant max(mixture/P, mixture/Q) at the evaluation
    /// string, in bits. Kept in the log domain: the raw ratio reaches
    /// thousands of bits on long strings and would overflow f64.
    #[serde(rename = "log2_C", skip_serializing_if = "Option::is_none")]
    pub log2_domination: Option<f64>,
    /// log2 of the ratio of the squared mean-product to the product of the
    /// two mass products.
    #[serde(rename = "log2_c", skip_serializing_if = "Option::is_none")]
    pub log2_mean_ratio: Option<f64>,
    /// Code-length surrogate for the pair description, L(P) + L(Q) + 2.
    #[serde(rename = "K_pair", skip_serializing_if = "Option::is_none")]
    pub pair_code_length: Option<u32>,
    /// Supremum of the randomness deficiency along the sequence.
    #[serde(rename = "D", skip_serializing_if = "Option::is_none")]
    pub deficiency_sup: Option<f64>,
    #[serde(rename = "L_P", skip_serializing_if = "Option::is_none")]
    pub code_length_p: Option<u32>,
    #[serde(rename = "L_Q", skip_serializing_if = "Option::is_none")]
    pub code_length_q: Option<u32>,
    /// Measured sum of squared conditional differences.
    pub sum: f64,
    /// Explicit-constant bound the sum is checked against.
    pub bound: f64,
    /// bound - sum.
    pub slack: f64,
    pub pass: bool,
}

/// Numerical slack admitted when comparing a measured sum to its bound.
pub const SLACK_TOLERANCE: f64 = 1e-9;

impl BoundReport {
    /// Builds a report from a measured sum and its bound, deriving
    /// `slack` and `pass`.
    pub fn new(sum: f64, bound: f64) -> Self {
        let slack = bound - sum;
        BoundReport {
            log2_domination: None,
            log2_mean_ratio: None,
            pair_code_length: None,
            deficiency_sup: None,
            code_length_p: None,
            code_length_q: None,
            sum,
            bound,
            slack,
            pass: slack >= -SLACK_TOLERANCE,
        }
    }
}
