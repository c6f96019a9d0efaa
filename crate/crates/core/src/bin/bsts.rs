use std::path::PathBuf;
use std::process::ExitCode;

use bsts::run::{run, Command, Overrides, RunConfig};
use bsts::sampler::Preset;
use bsts::{Error, Result};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bsts", version, about = "Structural time-series forecasting with spike-and-slab selection")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// TOML run configuration
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Wide CSV of monthly series
    #[arg(long, global = true)]
    data: Option<PathBuf>,
    #[arg(long, global = true)]
    target: Option<String>,
    /// h1, h3, h6, h12 or h24
    #[arg(long, global = true)]
    preset: Option<String>,
    #[arg(long, global = true)]
    horizon: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; all cores when absent
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Parse, transform and align; writes aligned.csv
    Ingest,
    /// Summary statistics per series
    Diagnose,
    /// Causal screening of predictors against the target
    Screen,
    /// Posterior sampling; writes fit.json, inclusion.csv, draws.csv
    Fit,
    /// Fit, then posterior predictive forecasts
    Forecast,
    /// Metrics, Murphy diagrams and multiple comparisons
    Evaluate,
    /// Local-projection impulse responses
    Irf,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Ingest => Command::Ingest,
            Cmd::Diagnose => Command::Diagnose,
            Cmd::Screen => Command::Screen,
            Cmd::Fit => Command::Fit,
            Cmd::Forecast => Command::Forecast,
            Cmd::Evaluate => Command::Evaluate,
            Cmd::Irf => Command::Irf,
        }
    }
}

fn execute(cli: Cli) -> Result<Vec<PathBuf>> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    let base = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let preset = cli.preset.as_deref().map(str::parse::<Preset>).transpose()?;
    let cfg = base.resolve(Overrides {
        data: cli.data,
        target: cli.target,
        preset,
        horizon: cli.horizon,
        seed: cli.seed,
        out: cli.out,
    });
    run(cli.command.into(), &cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            let json = serde_json::json!({
                "schema_version": bsts::sampler::SCHEMA_VERSION,
                "error": { "kind": e.kind(), "exit_code": e.exit_code(), "message": e.to_string() },
            });
            println!("{json}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
