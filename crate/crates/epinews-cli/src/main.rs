//! Command-line front end for the pipeline: ingest and validate tuple
//! corpora, fit the supervised temporal topic model, convert trends to
//! sampled counts, run one-step-ahead estimators, and drive the rolling
//! evaluation protocol.
//!
//! Every run is reproducible from the single `--seed` flag; subordinate
//! RNG streams are derived from it. Exit codes are stable for scripting:
//! 0 success, 1 usage or configuration error, 2 data error, 3 numeric
//! failure.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use epinews::Error;

/// Default base seed, fixed so that bare invocations are reproducible.
pub const DEFAULT_SEED: u64 = 1729;

#[derive(Parser)]
#[command(name = "epinews", version, about = "News-driven disease case-count estimation")]
struct Cli {
    /// Base RNG seed (default 1729); all randomness derives from it.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker bound for parallel stages: 0 = all cores, 1 = sequential.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Optional KEY=VALUE defaults file; keys are long flag names.
    /// Flags given on the command line win over file entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a tuple corpus and print its dimensions.
    Ingest(IngestArgs),
    /// Fit the topic model and export the posterior matrices.
    FitTopics(FitTopicsArgs),
    /// Convert an exported temporal trend row into sampled case counts.
    Sample(SampleArgs),
    /// Fit one estimator on full history and print the next-step estimate.
    Estimate(EstimateArgs),
    /// Run the rolling evaluation protocol for one method.
    Evaluate(EvaluateArgs),
    /// Evaluate several methods on one series and tabulate NRMSE.
    Compare(CompareArgs),
    /// Generate a synthetic corpus, seed spec, case counts, and truth.
    Synth(SynthArgs),
}

#[derive(Args)]
struct IngestArgs {
    /// Tuple corpus (JSONL).
    #[arg(long)]
    corpus: PathBuf,
    /// Rewrite the corpus in canonical form (header line + records).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FitTopicsArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// Seed spec (JSON object: topic name -> seed words).
    #[arg(long)]
    seeds: PathBuf,
    /// Output directory for theta/phi_r/phi_s/xi CSVs and the manifest.
    #[arg(long)]
    out_dir: PathBuf,
    /// Gibbs sweeps (default 300).
    #[arg(long)]
    iterations: Option<usize>,
    /// Seed-path probability (default 0.7).
    #[arg(long)]
    pi: Option<f64>,
    /// Smoothing overrides; defaults are 2/K, 0.01, 0.01, 1e-7.
    #[arg(long)]
    alpha_smooth: Option<f64>,
    #[arg(long)]
    gamma_smooth: Option<f64>,
    #[arg(long)]
    beta_smooth: Option<f64>,
    #[arg(long)]
    mu_smooth: Option<f64>,
    /// Top regular words to print per topic.
    #[arg(long)]
    top_words: Option<usize>,
}

#[derive(Args)]
struct SampleArgs {
    /// xi.csv produced by fit-topics.
    #[arg(long)]
    xi: PathBuf,
    /// Topic row to sample from.
    #[arg(long)]
    topic: Option<usize>,
    /// Case-count CSV supplying the cumulative total.
    #[arg(long)]
    case_counts: Option<PathBuf>,
    /// Last time index (inclusive) of counts feeding the total;
    /// defaults to the whole series.
    #[arg(long)]
    through: Option<usize>,
    /// Explicit number of draws (overrides --case-counts).
    #[arg(long)]
    total: Option<u64>,
    /// Output CSV (time_index,value).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EstimateArgs {
    #[arg(long)]
    case_counts: PathBuf,
    /// External input series CSV (time_index,value), e.g. an exported
    /// trend row or sampled counts.
    #[arg(long)]
    external: Option<PathBuf>,
    /// arnet | arma | armax
    #[arg(long)]
    method: Option<String>,
    #[arg(short, long)]
    p: Option<usize>,
    #[arg(short, long)]
    q: Option<usize>,
    /// ARNet rolling window.
    #[arg(short, long)]
    r: Option<usize>,
    /// ARNet shift (<= 0 unless --retrospective).
    #[arg(short, long)]
    s: Option<i64>,
    #[arg(long)]
    lambda1: Option<f64>,
    #[arg(long)]
    lambda2: Option<f64>,
    /// Cross-validate the ARNet configuration instead of fixing it.
    #[arg(long)]
    cv: bool,
    /// Permit positive shifts (indexing trends past the horizon).
    #[arg(long)]
    retrospective: bool,
    /// Write the fitted model as JSON.
    #[arg(long)]
    model_out: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    case_counts: PathBuf,
    /// arma | armax-trends | armax-samples | arnet-trends | arnet-samples
    #[arg(long)]
    method: Option<String>,
    /// Last time index of the static training period.
    #[arg(long)]
    train_end: Option<usize>,
    /// Last evaluated horizon (default: end of the case-count series).
    #[arg(long)]
    eval_end: Option<usize>,
    /// Corpus and seed spec; required by every method except arma.
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    seeds: Option<PathBuf>,
    /// Disease-topic row feeding the external component.
    #[arg(long)]
    topic: Option<usize>,
    #[arg(long)]
    disease: Option<String>,
    /// weekly | monthly
    #[arg(long)]
    granularity: Option<String>,
    /// range | mean
    #[arg(long)]
    normalizer: Option<String>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    eval: EvaluateArgs,
    /// Comma-separated methods, or `all`.
    #[arg(long)]
    methods: Option<String>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    topics: Option<usize>,
    #[arg(long)]
    locations: Option<usize>,
    #[arg(long)]
    time_points: Option<usize>,
    #[arg(long)]
    vocab: Option<usize>,
    #[arg(long)]
    tokens: Option<u64>,
    #[arg(long)]
    seeds_per_topic: Option<usize>,
    /// Scale mapping the chosen trend row to case counts.
    #[arg(long)]
    count_scale: Option<f64>,
    /// Innovation standard deviation of the AR(1) noise on counts.
    #[arg(long)]
    noise_sd: Option<f64>,
    /// AR(1) coefficient of the count noise.
    #[arg(long)]
    noise_ar: Option<f64>,
    /// Topic row whose trend drives the counts.
    #[arg(long)]
    topic: Option<usize>,
    #[arg(long)]
    out_dir: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };

    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_class())
        }
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    let file = config::FileConfig::load(cli.config.as_deref())?;
    let seed = file.resolve(cli.seed, "seed")?.unwrap_or(DEFAULT_SEED);
    let jobs = file.resolve(cli.jobs, "jobs")?.unwrap_or(0);
    let ctx = commands::Context { seed, jobs, file };
    match cli.command {
        Command::Ingest(args) => commands::ingest(&ctx, args),
        Command::FitTopics(args) => commands::fit_topics(&ctx, args),
        Command::Sample(args) => commands::sample(&ctx, args),
        Command::Estimate(args) => commands::estimate(&ctx, args),
        Command::Evaluate(args) => commands::evaluate(&ctx, args),
        Command::Compare(args) => commands::compare(&ctx, args),
        Command::Synth(args) => commands::synth(&ctx, args),
    }
}
