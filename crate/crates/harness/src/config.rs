//! Scenario configuration: CLI flags, optional JSON config files, defaults,
//! and validation. Flags override file values; both override defaults.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

/// Which experiment a run executes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    Lemmas,
    Simulate,
    Expect,
    HmDemo,
    Deficiency,
    Bounds,
}

impl ScenarioKind {
    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Lemmas => "lemmas",
            ScenarioKind::Simulate => "simulate",
            ScenarioKind::Expect => "expect",
            ScenarioKind::HmDemo => "hm-demo",
            ScenarioKind::Deficiency => "deficiency",
            ScenarioKind::Bounds => "bounds",
        }
    }
}

/// What the bounds scenario verifies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundsMode {
    /// Pairwise two-measure chain checks only.
    Chains,
    /// Per-sequence MDL bound assembly only.
    Sequence,
    /// Both campaigns.
    Both,
}

impl std::str::FromStr for BoundsMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "chains" => Ok(BoundsMode::Chains),
            "sequence" => Ok(BoundsMode::Sequence),
            "both" => Ok(BoundsMode::Both),
            other => Err(format!(
                "mode: expected chains, sequence, or both (got {other})"
            )),
        }
    }
}

/// Seeds as written in a config file: either an explicit list or the same
/// range/list syntax the --seeds flag accepts.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SeedSpec {
    Text(String),
    List(Vec<u64>),
}

impl SeedSpec {
    pub fn resolve(&self) -> Result<Vec<u64>, String> {
        match self {
            SeedSpec::List(v) => Ok(v.clone()),
            SeedSpec::Text(s) => parse_seeds(s),
        }
    }
}

/// Parses "a..b" (half-open), "x,y,z", or a single seed.
pub fn parse_seeds(text: &str) -> Result<Vec<u64>, String> {
    let text = text.trim();
    if let Some((a, b)) = text.split_once("..") {
        let a: u64 = a
            .trim()
            .parse()
            .map_err(|_| format!("seeds: bad range start {a:?}"))?;
        let b: u64 = b
            .trim()
            .parse()
            .map_err(|_| format!("seeds: bad range end {b:?}"))?;
        if b <= a {
            return Err(format!("seeds: empty range {a}..{b}"));
        }
        return Ok((a..b).collect());
    }
    text.split(',')
        .map(|part| {
            part.trim()
                .parse::<u64>()
                .map_err(|_| format!("seeds: bad value {part:?}"))
        })
        .collect()
}

/// A config file or flag set before defaults are applied.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PartialConfig {
    pub class: Option<PathBuf>,
    pub truth: Option<usize>,
    pub n: Option<usize>,
    pub depth: Option<u32>,
    pub seeds: Option<SeedSpec>,
    pub gamma: Option<f64>,
    pub weight: Option<f64>,
    pub alpha_bits: Option<u32>,
    pub out: Option<PathBuf>,
    pub mode: Option<BoundsMode>,
    pub staged: Option<bool>,
}

impl PartialConfig {
    /// Values from `other` win where present.
    fn overlay(self, other: PartialConfig) -> PartialConfig {
        PartialConfig {
            class: other.class.or(self.class),
            truth: other.truth.or(self.truth),
            n: other.n.or(self.n),
            depth: other.depth.or(self.depth),
            seeds: other.seeds.or(self.seeds),
            gamma: other.gamma.or(self.gamma),
            weight: other.weight.or(self.weight),
            alpha_bits: other.alpha_bits.or(self.alpha_bits),
            out: other.out.or(self.out),
            mode: other.mode.or(self.mode),
            staged: other.staged.or(self.staged),
        }
    }
}

/// Hard cap on exhaustive tree depth.
pub const DEPTH_CAP: u32 = 20;

/// A fully resolved, validated scenario configuration. Serialized verbatim
/// into every summary so runs are reproducible from their outputs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub scenario: ScenarioKind,
    pub class: Option<PathBuf>,
    pub truth: Option<usize>,
    /// Sequence length; for lemmas, samples per seed.
    pub n: usize,
    pub depth: u32,
    pub seeds: Vec<u64>,
    pub gamma: f64,
    /// hm-demo contamination weight w.
    pub weight: f64,
    /// hm-demo dyadic precision of alpha.
    pub alpha_bits: u32,
    pub out: PathBuf,
    pub mode: BoundsMode,
    pub staged: bool,
}

impl ScenarioConfig {
    /// Applies defaults under `file` under `flags`, then validates.
    pub fn resolve(
        scenario: ScenarioKind,
        file: PartialConfig,
        flags: PartialConfig,
    ) -> Result<ScenarioConfig, String> {
        let merged = file.overlay(flags);
        let seeds = match &merged.seeds {
            Some(spec) => spec.resolve()?,
            None => vec![0],
        };
        let config = ScenarioConfig {
            scenario,
            class: merged.class,
            truth: merged.truth,
            n: merged.n.unwrap_or(100),
            depth: merged.depth.unwrap_or(6),
            seeds,
            gamma: merged.gamma.unwrap_or(3.0),
            weight: merged.weight.unwrap_or(0.99),
            alpha_bits: merged.alpha_bits.unwrap_or(1200),
            out: merged
                .out
                .unwrap_or_else(|| PathBuf::from("out").join(scenario.name())),
            mode: merged.mode.unwrap_or(BoundsMode::Both),
            staged: merged.staged.unwrap_or(false),
        };
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<(), String> {
        if self.n < 1 {
            return Err(format!("n: must be at least 1 (got {})", self.n));
        }
        if self.depth > DEPTH_CAP {
            return Err(format!(
                "depth: must be at most {DEPTH_CAP} (got {})",
                self.depth
            ));
        }
        if self.seeds.is_empty() {
            return Err("seeds: must be non-empty".into());
        }
        if !(self.weight >= 0.0 && self.weight < 1.0) {
            return Err(format!("weight: must lie in [0, 1) (got {})", self.weight));
        }
        if !(self.gamma > 1.0) {
            return Err(format!("gamma: must exceed 1 (got {})", self.gamma));
        }
        let needs_class = matches!(
            self.scenario,
            ScenarioKind::Simulate
                | ScenarioKind::Expect
                | ScenarioKind::Deficiency
                | ScenarioKind::Bounds
        );
        if needs_class && self.class.is_none() {
            return Err("class: required for this scenario".into());
        }
        let needs_truth = match self.scenario {
            ScenarioKind::Simulate | ScenarioKind::Expect | ScenarioKind::Deficiency => true,
            ScenarioKind::Bounds => self.mode != BoundsMode::Chains,
            _ => false,
        };
        if needs_truth && self.truth.is_none() {
            return Err("truth: required for this scenario".into());
        }
        if self.scenario == ScenarioKind::HmDemo {
            let needed = self.n.saturating_mul(4);
            if (self.alpha_bits as usize) < needed {
                return Err(format!(
                    "alpha_bits: must be at least 4 * n = {needed} (got {})",
                    self.alpha_bits
                ));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_parsing_forms() {
        assert_eq!(parse_seeds("7").unwrap(), vec![7]);
        assert_eq!(parse_seeds("1,5,9").unwrap(), vec![1, 5, 9]);
        assert_eq!(parse_seeds("0..4").unwrap(), vec![0, 1, 2, 3]);
        assert_eq!(parse_seeds(" 2 .. 5 ").unwrap(), vec![2, 3, 4]);
        assert!(parse_seeds("5..5").is_err());
        assert!(parse_seeds("a..b").is_err());
        assert!(parse_seeds("1,x").is_err());
    }

    #[test]
    fn flags_override_file_values() {
        let file = PartialConfig {
            n: Some(50),
            gamma: Some(2.0),
            ..PartialConfig::default()
        };
        let flags = PartialConfig {
            gamma: Some(4.0),
            ..PartialConfig::default()
        };
        let cfg = ScenarioConfig::resolve(ScenarioKind::Lemmas, file, flags).unwrap();
        assert_eq!(cfg.n, 50);
        assert_eq!(cfg.gamma, 4.0);
        assert_eq!(cfg.seeds, vec![0]);
    }

    #[test]
    fn validation_rejects_bad_fields() {
        let base = PartialConfig::default();
        let zero_n = PartialConfig {
            n: Some(0),
            ..base.clone()
        };
        assert!(ScenarioConfig::resolve(ScenarioKind::Lemmas, zero_n, base.clone())
            .unwrap_err()
            .starts_with("n:"));
        let deep = PartialConfig {
            depth: Some(21),
            ..base.clone()
        };
        assert!(ScenarioConfig::resolve(ScenarioKind::Lemmas, deep, base.clone())
            .unwrap_err()
            .starts_with("depth:"));
        let w = PartialConfig {
            weight: Some(1.0),
            ..base.clone()
        };
        assert!(ScenarioConfig::resolve(ScenarioKind::HmDemo, w, base.clone())
            .unwrap_err()
            .starts_with("weight:"));
        let missing_class = base.clone();
        assert!(
            ScenarioConfig::resolve(ScenarioKind::Simulate, missing_class, base.clone())
                .unwrap_err()
                .starts_with("class:")
        );
        let small_alpha = PartialConfig {
            n: Some(400),
            alpha_bits: Some(1200),
            ..base.clone()
        };
        assert!(
            ScenarioConfig::resolve(ScenarioKind::HmDemo, small_alpha, base)
                .unwrap_err()
                .starts_with("alpha_bits:")
        );
    }

    #[test]
    fn config_file_round_trip() {
        let text = r#"{"n": 12, "seeds": "0..3", "gamma": 2.5}"#;
        let partial: PartialConfig = serde_json::from_str(text).unwrap();
        let cfg =
            ScenarioConfig::resolve(ScenarioKind::Lemmas, partial, PartialConfig::default())
                .unwrap();
        assert_eq!(cfg.n, 12);
        assert_eq!(cfg.seeds, vec![0, 1, 2]);
        assert_eq!(cfg.gamma, 2.5);
        let listed: PartialConfig =
            serde_json::from_str(r#"{"seeds": [4, 9]}"#).unwrap();
        assert_eq!(listed.seeds.unwrap().resolve().unwrap(), vec![4, 9]);
        assert!(serde_json::from_str::<PartialConfig>(r#"{"bogus": 1}"#).is_err());
    }
}
