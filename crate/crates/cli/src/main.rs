//! `pumpwatch`: fetch, featurize, synthesize, train, evaluate and detect.

mod commands;
mod config;
mod error;
mod time;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pumpwatch::Millis;

use crate::config::Config;
use crate::error::{report, CliError, EXIT_USAGE};
use crate::time::parse_time;

#[derive(Debug, Parser)]
#[command(name = "pumpwatch", version, about = "Pump-and-dump detection on exchange trade ticks")]
struct Cli {
    /// TOML config; defaults to $PUMPWATCH_CONFIG when set.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Download historical trades for one pair.
    Fetch(FetchArgs),
    /// Chunk a trade file and write its per-chunk features.
    Ingest(IngestArgs),
    /// Generate a synthetic trade stream with ground truth.
    Synth(SynthArgs),
    /// Train a tree ensemble on feature files.
    Train(TrainArgs),
    /// Cross-validate a detector over labeled events.
    Evaluate(EvaluateArgs),
    /// Replay a trade file through a detector and emit alerts.
    Detect(DetectArgs),
}

#[derive(Debug, Args)]
pub struct FetchArgs {
    #[arg(long)]
    pub pair: String,
    /// Epoch ms or ISO-8601.
    #[arg(long, value_parser = parse_time)]
    pub start: Millis,
    #[arg(long, value_parser = parse_time)]
    pub end: Millis,
    #[arg(long)]
    pub out: PathBuf,
    /// Defaults to `<out>.manifest.json`.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long)]
    pub base_url: Option<String>,
    #[arg(long)]
    pub page_size: Option<u32>,
    /// Requests per minute.
    #[arg(long)]
    pub rate_limit: Option<u32>,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Defaults to the file stem.
    #[arg(long)]
    pub pair: Option<String>,
    /// Chunk size in seconds.
    #[arg(long)]
    pub chunk: Option<u32>,
    /// Window length, e.g. `7h` or `35m`.
    #[arg(long)]
    pub window: Option<String>,
    /// End the moving window at the previous chunk.
    #[arg(long)]
    pub exclusive: bool,
    /// First chunk; defaults to the chunk of the first trade.
    #[arg(long, value_parser = parse_time)]
    pub start: Option<Millis>,
    /// Emit chunks up to this time even if no trades reach it.
    #[arg(long, value_parser = parse_time)]
    pub end: Option<Millis>,
    /// Label chunks containing a signal of this pair.
    #[arg(long)]
    pub events: Option<PathBuf>,
    #[arg(long)]
    pub features_out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    Standard,
    Crowd,
    Quiet,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, required_unless_present = "preset", conflicts_with = "preset")]
    pub scenario: Option<PathBuf>,
    /// A scenario from the built-in suite instead of a file.
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    /// Scenario number within the suite.
    #[arg(long, default_value_t = 0)]
    pub index: u64,
    /// Days of background market for `--preset quiet`.
    #[arg(long, default_value_t = 1)]
    pub days: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Write the scenario that was generated, as TOML.
    #[arg(long)]
    pub scenario_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EnsembleKind {
    Rf,
    Ada,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MaskArg {
    All,
    NoTime,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// One or more feature files.
    #[arg(long, required = true, num_args = 1..)]
    pub features: Vec<PathBuf>,
    /// Labels from events instead of the label column.
    #[arg(long)]
    pub events: Option<PathBuf>,
    /// Only use events of this pair.
    #[arg(long)]
    pub pair: Option<String>,
    #[arg(long, value_enum, default_value = "rf")]
    pub model: EnsembleKind,
    #[arg(long, value_enum, default_value = "all")]
    pub mask: MaskArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Chunk size the features were computed with.
    #[arg(long)]
    pub chunk: Option<u32>,
    #[arg(long)]
    pub window: Option<String>,
    #[arg(long)]
    pub exclusive: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DetectorArg {
    Rf,
    Ada,
    Threshold,
    Kamps,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KampsArg {
    Initial,
    Balanced,
    Strict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AveragingArg {
    Micro,
    Macro,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub events: PathBuf,
    /// Directory of `<PAIR>.csv` or `<PAIR>.jsonl` trade files.
    #[arg(long)]
    pub trades_dir: PathBuf,
    #[arg(long, value_enum)]
    pub model: DetectorArg,
    #[arg(long, value_enum, default_value = "all")]
    pub mask: MaskArg,
    #[arg(long, value_enum, default_value = "balanced")]
    pub preset: KampsArg,
    /// Rush-order threshold for `--model threshold`.
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub chunk: Option<u32>,
    #[arg(long)]
    pub window: Option<String>,
    #[arg(long)]
    pub exclusive: bool,
    #[arg(long)]
    pub match_tolerance_chunks: Option<usize>,
    #[arg(long, value_enum)]
    pub averaging: Option<AveragingArg>,
    #[arg(long)]
    pub cooldown: Option<u32>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also write the report as JSON.
    #[arg(long)]
    pub report_out: Option<PathBuf>,
    /// Print JSON instead of a table.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    /// Trained model file.
    #[arg(long, required_unless_present = "threshold")]
    pub model: Option<PathBuf>,
    /// Use the rush-order threshold rule instead of a model.
    #[arg(long, conflicts_with_all = ["model", "crowd"])]
    pub threshold: Option<f64>,
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub pair: Option<String>,
    /// Long-horizon inference on wide chunks with a long cooldown.
    #[arg(long)]
    pub crowd: bool,
    #[arg(long)]
    pub cooldown: Option<u32>,
    /// `-` for stdout.
    #[arg(long, default_value = "-")]
    pub alerts_out: PathBuf,
    /// Pace the replay at this multiple of market time.
    #[arg(long)]
    pub replay_speed: Option<f64>,
    /// Chunk size for `--threshold`.
    #[arg(long)]
    pub chunk: Option<u32>,
    #[arg(long)]
    pub window: Option<String>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let config = Config::load(cli.config.as_deref())?;
    match cli.command {
        Command::Fetch(a) => commands::fetch(&config, a),
        Command::Ingest(a) => commands::ingest(&config, a),
        Command::Synth(a) => commands::synth(a),
        Command::Train(a) => commands::train(&config, a),
        Command::Evaluate(a) => commands::evaluate(&config, a),
        Command::Detect(a) => commands::detect(&config, a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            report("usage", e.render().to_string().trim_end().to_string(), EXIT_USAGE);
            return ExitCode::from(EXIT_USAGE as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            report(e.kind(), e.to_string(), e.exit_code());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
