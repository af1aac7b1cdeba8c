//! `coordtune`: grid-search hyperparameter tuning experiments for neural
//! symbol detection over simulated optical channels.

mod chanstats;
mod config;
mod eval;
mod sweep;
mod tune;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use coordtune::tuner::{Method, TunerError};

use config::{parse_method, Overrides};

#[derive(Parser)]
#[command(name = "coordtune", version, about)]
struct Cli {
    /// Campaign config file (JSON); defaults to the built-in campaign.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured search methods on each system and write logs.
    Tune {
        /// Comma-separated subset: marginal, alternating, joint, random.
        #[arg(long, value_delimiter = ',')]
        methods: Option<Vec<String>>,
        /// Comma-separated subset of configured system names.
        #[arg(long, value_delimiter = ',')]
        systems: Option<Vec<String>>,
        #[arg(long)]
        max_steps: Option<usize>,
        #[arg(long)]
        base_seed: Option<u64>,
        #[arg(long)]
        random_trials: Option<usize>,
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Score one hyperparameter point on one system.
    Eval {
        /// Inline JSON object, or `@path` to a JSON file.
        #[arg(long)]
        point: String,
        /// Configured system name, or `awgn` for an ad-hoc AWGN system.
        #[arg(long, default_value = "awgn")]
        system: String,
        /// Es/N0 in dB for the ad-hoc AWGN system.
        #[arg(long)]
        es_n0_db: Option<f64>,
        /// Trial seed; derived from the base seed and point key if omitted.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Render the per-axis sweep table from existing report.jsonl logs.
    SweepTable {
        /// `label=path` pairs or bare paths to report.jsonl files.
        #[arg(required = true)]
        logs: Vec<String>,
        /// Output prefix; writes <prefix>.md and <prefix>.csv.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Empirical moments and distribution checks for a channel model.
    ChannelStats {
        /// fso | fiber | awgn
        #[arg(long)]
        channel: String,
        #[arg(long, default_value_t = 100_000)]
        n: usize,
        #[arg(long, default_value_t = 4.2)]
        alpha: f64,
        #[arg(long, default_value_t = 1.4)]
        beta: f64,
        #[arg(long, default_value_t = 10.0)]
        es_n0_db: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Tune {
            methods,
            systems,
            max_steps,
            base_seed,
            random_trials,
            output_dir,
        } => {
            let methods: Option<Vec<Method>> = methods
                .map(|ms| ms.iter().map(|m| parse_method(m)).collect())
                .transpose()?;
            let overrides = Overrides {
                methods,
                systems,
                max_steps,
                base_seed,
                random_trials,
                output_dir,
            };
            let cfg = config::resolve(cli.config.as_ref(), &overrides)?;
            tune::run(&cfg)
        }
        Command::Eval { point, system, es_n0_db, seed } => {
            let cfg = config::resolve(cli.config.as_ref(), &Overrides::default())?;
            eval::run(&cfg, &eval::EvalArgs { point, system, es_n0_db, seed })
        }
        Command::SweepTable { logs, out } => {
            let cfg = config::resolve(cli.config.as_ref(), &Overrides::default())?;
            sweep::run(&cfg.grid, &sweep::SweepArgs { logs, out })
        }
        Command::ChannelStats { channel, n, alpha, beta, es_n0_db, seed, out } => {
            chanstats::run(&chanstats::StatsArgs {
                channel,
                n,
                alpha,
                beta,
                es_n0_db,
                seed,
                out,
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            // Budget refusals carry the exact product so the caller can see
            // how far over the cap the request was.
            if let Some(TunerError::BudgetExceeded { product, cap }) =
                e.downcast_ref::<TunerError>()
            {
                eprintln!(
                    "joint enumeration refused: {product} combinations exceeds the cap of {cap}"
                );
            }
            ExitCode::FAILURE
        }
    }
}
