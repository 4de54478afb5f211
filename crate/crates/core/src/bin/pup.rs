use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pup::cli::{self, RunConfig};

#[derive(Parser)]
#[command(
    name = "pup",
    version,
    about = "Price-aware recommendation: prepare, analyze, train, evaluate"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    opts: Overrides,
}

#[derive(Subcommand)]
enum Command {
    /// Index, quantize and split the raw CSVs.
    Prepare,
    /// Per-user CWTP entropy report and histogram.
    AnalyzeCwtp,
    /// Train the configured variant.
    Train,
    /// Evaluate a checkpoint under the configured protocol.
    Evaluate,
    /// Evaluate a checkpoint under the CIR and UCIR protocols.
    ColdstartEval,
    /// Write planted-band synthetic interactions.csv / catalog.csv.
    Synth {
        #[arg(long, default_value_t = 200)]
        users: usize,
        #[arg(long, default_value_t = 500)]
        items: usize,
        #[arg(long, default_value_t = 5)]
        categories: usize,
    },
}

#[derive(Args)]
struct Overrides {
    /// `key = value` config file; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<String>,
    #[arg(long, global = true)]
    variant: Option<String>,
    #[arg(long, global = true)]
    levels: Option<String>,
    /// uniform | rank
    #[arg(long, global = true)]
    quantizer: Option<String>,
    #[arg(long, global = true)]
    alpha: Option<String>,
    /// global/category embedding sizes, e.g. 48/16
    #[arg(long, global = true)]
    dim_split: Option<String>,
    /// comma-separated cut-offs, e.g. 50,100
    #[arg(long, global = true)]
    k: Option<String>,
    /// standard | cir | ucir
    #[arg(long, global = true)]
    protocol: Option<String>,
    #[arg(long, global = true)]
    threads: Option<String>,
    #[arg(long, global = true)]
    out: Option<String>,
    #[arg(long, global = true)]
    interactions: Option<String>,
    #[arg(long, global = true)]
    catalog: Option<String>,
    #[arg(long, global = true)]
    dataset: Option<String>,
    #[arg(long, global = true)]
    checkpoint: Option<String>,
    #[arg(long, global = true)]
    epochs: Option<String>,
    /// any other config key, as key=value (repeatable)
    #[arg(long = "set", global = true)]
    set: Vec<String>,
}

impl Overrides {
    fn pairs(&self) -> Vec<(&'static str, &str)> {
        let named = [
            ("seed", &self.seed),
            ("variant", &self.variant),
            ("levels", &self.levels),
            ("quantizer", &self.quantizer),
            ("alpha", &self.alpha),
            ("dim_split", &self.dim_split),
            ("k", &self.k),
            ("protocol", &self.protocol),
            ("threads", &self.threads),
            ("out", &self.out),
            ("interactions", &self.interactions),
            ("catalog", &self.catalog),
            ("dataset", &self.dataset),
            ("checkpoint", &self.checkpoint),
            ("epochs", &self.epochs),
        ];
        named
            .into_iter()
            .filter_map(|(k, v)| v.as_deref().map(|v| (k, v)))
            .collect()
    }
}

fn build_config(opts: &Overrides) -> anyhow::Result<RunConfig> {
    let mut config = RunConfig::default();
    if let Some(path) = &opts.config {
        config.apply_file(path)?;
    }
    for (k, v) in opts.pairs() {
        config.apply(k, v)?;
    }
    for kv in &opts.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| anyhow::anyhow!("--set expects key=value, got {kv:?}"))?;
        config.apply(k.trim(), v)?;
    }
    Ok(config)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let config = build_config(&cli.opts)?;
    match cli.command {
        Command::Prepare => {
            let path = cli::cmd_prepare(&config)?;
            println!("{}", path.display());
        }
        Command::AnalyzeCwtp => {
            let (report, hist) = cli::cmd_analyze_cwtp(&config)?;
            println!("{}\n{}", report.display(), hist.display());
        }
        Command::Train => {
            let path = cli::cmd_train(&config)?;
            println!("{}", path.display());
        }
        Command::Evaluate => {
            for p in cli::cmd_evaluate(&config)? {
                println!("{}", p.display());
            }
        }
        Command::ColdstartEval => {
            for p in cli::cmd_coldstart_eval(&config)? {
                println!("{}", p.display());
            }
        }
        Command::Synth {
            users,
            items,
            categories,
        } => {
            let (a, b) = cli::cmd_synth(&config, users, items, categories)?;
            println!("{}\n{}", a.display(), b.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
