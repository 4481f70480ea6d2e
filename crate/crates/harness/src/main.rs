use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use predlab::config::{parse_seeds, BoundsMode, PartialConfig, ScenarioConfig, ScenarioKind, SeedSpec};
use predlab::output::write_json;
use predlab::scenarios::run_scenario;

#[derive(Parser)]
#[command(
    name = "predlab",
    version,
    about = "Sequence-prediction laboratory over finite Kraft-coded model classes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convexity-gap inequality campaigns on seeded scalars and vectors.
    Lemmas(RunArgs),
    /// Seeded MDL and mixture prediction traces from a truth entry.
    Simulate(RunArgs),
    /// Exact expected squared-error sums by depth.
    Expect(RunArgs),
    /// Interval-contamination demo: a mixture poisoned by a self-referential
    /// semimeasure versus the MDL predictor.
    #[command(name = "hm-demo")]
    HmDemo(RunArgs),
    /// Randomness-deficiency profiles and tail shells.
    Deficiency(RunArgs),
    /// Two-measure chain and per-sequence bound verification.
    Bounds(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON config file; explicit flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Model class file: a JSON list of entries.
    #[arg(long)]
    class: Option<PathBuf>,
    /// Truth entry id within the class.
    #[arg(long)]
    truth: Option<usize>,
    /// Sequence length (lemmas: samples per seed).
    #[arg(long)]
    n: Option<usize>,
    /// Enumeration depth for exact tree sums.
    #[arg(long)]
    depth: Option<u32>,
    /// Seeds: a single value, a comma list, or a half-open range a..b.
    #[arg(long)]
    seeds: Option<String>,
    /// MDL penalty multiplier; must exceed 1.
    #[arg(long)]
    gamma: Option<f64>,
    /// hm-demo contamination weight w in [0, 1).
    #[arg(long)]
    weight: Option<f64>,
    /// hm-demo dyadic precision of alpha; at least 4 * n.
    #[arg(long)]
    alpha_bits: Option<u32>,
    /// Output directory (created if missing).
    #[arg(long)]
    out: Option<PathBuf>,
    /// bounds only: chains, sequence, or both.
    #[arg(long)]
    mode: Option<BoundsMode>,
    /// hm-demo only: also emit staged alpha truncations.
    #[arg(long)]
    staged: bool,
}

impl RunArgs {
    fn to_partial(&self) -> Result<PartialConfig, String> {
        let seeds = match &self.seeds {
            // Parse eagerly so flag errors surface as config errors here.
            Some(text) => Some(SeedSpec::List(parse_seeds(text)?)),
            None => None,
        };
        Ok(PartialConfig {
            class: self.class.clone(),
            truth: self.truth,
            n: self.n,
            depth: self.depth,
            seeds,
            gamma: self.gamma,
            weight: self.weight,
            alpha_bits: self.alpha_bits,
            out: self.out.clone(),
            mode: self.mode,
            staged: if self.staged { Some(true) } else { None },
        })
    }
}

fn load_config_file(path: &PathBuf) -> Result<PartialConfig, String> {
    let text =
        std::fs::read_to_string(path).map_err(|e| format!("config {}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("config {}: {e}", path.display()))
}

fn run(kind: ScenarioKind, args: &RunArgs) -> Result<bool, String> {
    let file = match &args.config {
        Some(path) => load_config_file(path)?,
        None => PartialConfig::default(),
    };
    let flags = args.to_partial()?;
    let config = ScenarioConfig::resolve(kind, file, flags)?;
    let summary = run_scenario(&config)?;
    write_json(config.out.join("summary.json"), &summary)?;
    println!(
        "{}: {} seed(s), {}",
        kind.name(),
        config.seeds.len(),
        if summary.pass { "pass" } else { "FAIL" }
    );
    Ok(summary.pass)
}

fn main() {
    let cli = Cli::parse();
    let (kind, args) = match &cli.command {
        Command::Lemmas(a) => (ScenarioKind::Lemmas, a),
        Command::Simulate(a) => (ScenarioKind::Simulate, a),
        Command::Expect(a) => (ScenarioKind::Expect, a),
        Command::HmDemo(a) => (ScenarioKind::HmDemo, a),
        Command::Deficiency(a) => (ScenarioKind::Deficiency, a),
        Command::Bounds(a) => (ScenarioKind::Bounds, a),
    };
    let start = Instant::now();
    let code = match run(kind, args) {
        Ok(true) => 0,
        Ok(false) => {
            eprintln!("one or more bound checks failed");
            1
        }
        Err(message) => {
            eprintln!("error: {message}");
            2
        }
    };
    // Wall time stays out of the serialized outputs so reruns are
    // byte-identical.
    eprintln!("elapsed: {:?}", start.elapsed());
    std::process::exit(code);
}
