use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;

use crate::commands::{self, Outcome};
use crate::manifest::{flags_to_args, OutputDir, RunManifest};
use crate::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "credal", version, about = "Higher-order credal sets: TV-uniform measures, towers and HOCS tests")]
pub struct Cli {
    /// Seed for every random stream.
    #[arg(long, global = true, env = "CREDAL_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (defaults to all cores). Outputs do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output directory. Defaults to `out/<command>`; `urn` only writes
    /// files when this is given.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Also render SVG line charts.
    #[arg(long, global = true)]
    pub svg: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// HOCS curve and head-count reference table for a coin tossed n times.
    BinomialTest(BinomialTestArgs),
    /// Build a tower over the binomial family and report per-order spread.
    Converge(ConvergeArgs),
    /// Next-draw predictive for an urn of unknown composition.
    Urn(UrnArgs),
    /// Matching-coins dilation at order 1 and its recovery at higher orders.
    Dilation(DilationArgs),
    /// TV-uniform density and head-count table of the binomial family.
    TvuDensity(TvuDensityArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::BinomialTest(_) => "binomial-test",
            Command::Converge(_) => "converge",
            Command::Urn(_) => "urn",
            Command::Dilation(_) => "dilation",
            Command::TvuDensity(_) => "tvu-density",
        }
    }

    fn flags(&self) -> BTreeMap<String, Value> {
        let v = match self {
            Command::BinomialTest(a) => serde_json::to_value(a),
            Command::Converge(a) => serde_json::to_value(a),
            Command::Urn(a) => serde_json::to_value(a),
            Command::Dilation(a) => serde_json::to_value(a),
            Command::TvuDensity(a) => serde_json::to_value(a),
        };
        match v.expect("flags serialize") {
            Value::Object(m) => m.into_iter().collect(),
            _ => BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BinomialTestArgs {
    /// Number of tosses.
    #[arg(long, visible_alias = "trials", default_value_t = 10)]
    pub n: u64,
    /// Observed heads.
    #[arg(long, visible_alias = "heads", default_value_t = 1)]
    pub k: u64,
    /// Base quadrature panels per parameter dimension.
    #[arg(long, default_value_t = credal_core::tvuniform::DEFAULT_RESOLUTION)]
    pub resolution: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BaseModeArg {
    /// Stratified draws from the TV-uniform measure.
    Tvu,
    /// Evenly spaced success probabilities.
    Grid,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ConvergeArgs {
    #[arg(long, visible_alias = "trials", default_value_t = 10)]
    pub n: u64,
    /// Head counts to track, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [1u64, 3, 5])]
    pub events: Vec<u64>,
    #[arg(long, default_value_t = 1601)]
    pub base_samples: usize,
    #[arg(long, default_value_t = 1601)]
    pub order_samples: usize,
    #[arg(long, default_value_t = 5)]
    pub max_order: usize,
    #[arg(long, value_enum, default_value_t = BaseModeArg::Tvu)]
    pub base_mode: BaseModeArg,
    #[arg(long, default_value_t = credal_core::tvuniform::DEFAULT_RESOLUTION)]
    pub resolution: usize,
    /// Also write every particle to tower.jsonl.
    #[arg(long)]
    pub dump_tower: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum UrnModeArg {
    Exact,
    Float,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct UrnArgs {
    /// Colors drawn so far, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub history: Vec<String>,
    #[arg(long, value_delimiter = ',', default_values_t = ["red".to_string(), "yellow".to_string(), "blue".to_string()])]
    pub colors: Vec<String>,
    #[arg(long, default_value_t = 100)]
    pub balls: u32,
    #[arg(long, value_enum, default_value_t = UrnModeArg::Exact)]
    pub mode: UrnModeArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightingArg {
    CountOnce,
    Multiplicity,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DilationArgs {
    /// Grid points for the second coin's bias.
    #[arg(long, default_value_t = 101)]
    pub grid: usize,
    #[arg(long, default_value_t = 5)]
    pub orders: usize,
    /// Particles per order above the first.
    #[arg(long, default_value_t = 2000)]
    pub samples: usize,
    /// How members merged by conditioning are counted.
    #[arg(long, value_enum, default_value_t = WeightingArg::CountOnce)]
    pub weighting: WeightingArg,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TvuDensityArgs {
    #[arg(long, visible_alias = "trials", default_value_t = 10)]
    pub n: u64,
    /// Parametrize by x with p = x^power; the measure should not care.
    #[arg(long, default_value_t = 1.0)]
    pub power: f64,
    #[arg(long, default_value_t = credal_core::tvuniform::DEFAULT_RESOLUTION)]
    pub resolution: usize,
    /// Evaluation points on [0, 1], endpoints included.
    #[arg(long, default_value_t = 1001)]
    pub points: usize,
}

/// Shared settings handed to every command.
#[derive(Debug, Clone, Copy)]
pub struct Settings {
    pub seed: u64,
    pub format: Format,
    pub svg: bool,
}

impl Cli {
    fn globals(&self) -> BTreeMap<String, Value> {
        let mut g = BTreeMap::new();
        g.insert("seed".into(), Value::from(self.seed));
        g.insert("threads".into(), self.threads.map(Value::from).unwrap_or(Value::Null));
        g.insert("format".into(), serde_json::to_value(self.format).unwrap());
        g.insert("svg".into(), Value::Bool(self.svg));
        g
    }
}

fn dispatch(cli: &Cli) -> CliResult<Outcome> {
    let s = Settings { seed: cli.seed, format: cli.format, svg: cli.svg };
    match &cli.command {
        Command::BinomialTest(a) => commands::binomial_test(a, s),
        Command::Converge(a) => commands::converge(a, s),
        Command::Urn(a) => commands::urn(a, s),
        Command::Dilation(a) => commands::dilation(a, s),
        Command::TvuDensity(a) => commands::tvu_density(a, s),
    }
}

/// Runs one parsed invocation: computes, writes outputs and the manifest,
/// prints the summary.
pub fn execute(cli: &Cli) -> CliResult<()> {
    if cli.threads == Some(0) {
        return Err(CliError::Usage("--threads must be at least 1".into()));
    }
    let started = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    let outcome = pool.install(|| dispatch(cli))?;

    let name = cli.command.name();
    let out = match &cli.out {
        Some(dir) => Some(dir.clone()),
        None if outcome.stdout_only || outcome.files.is_empty() => None,
        None => Some(PathBuf::from("out").join(name)),
    };
    if let Some(dir) = out {
        let mut dir = OutputDir::create(dir)?;
        for (file, bytes) in &outcome.files {
            dir.write(file, bytes)?;
        }
        let globals = cli.globals();
        let flags = cli.command.flags();
        let manifest = RunManifest {
            command: name.to_string(),
            rerun: flags_to_args(name, &globals, &flags),
            flags: globals.into_iter().chain(flags).collect(),
            seed: cli.seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            labels: outcome.labels.iter().map(|s| s.to_string()).collect(),
            wall_clock_seconds: started.elapsed().as_secs_f64(),
            outputs: BTreeMap::new(),
        };
        dir.finish(manifest)?;
    }
    let mut stdout = std::io::stdout().lock();
    stdout.write_all(outcome.stdout.as_bytes()).map_err(|e| CliError::io("<stdout>", e))?;
    Ok(())
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn main() -> i32 {
    run(std::env::args_os())
}
