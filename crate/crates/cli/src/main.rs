use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use aggmo_cli::config::ModeSpec;
use aggmo_cli::{execute, CliError, Format, MethodName, Overrides, Result, RunConfig};
use clap::{Args, Parser, Subcommand};

/// Aggregated momentum experiments.
#[derive(Debug, Parser)]
#[command(name = "aggmo", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one method on one problem for every seed and learning rate.
    Optimize(Flags),
    /// Noisy 1-D regression with a small MLP, compared across methods.
    FunnelRegression(Flags),
    /// Best convergence rate on two-eigenvalue quadratics against κ.
    SweepRates(Flags),
    /// Nesterov against its two-velocity AggMo reparameterization.
    EquivCheck(Flags),
    /// Online convex runs measured against the regret bound.
    RegretCheck(Flags),
}

#[derive(Debug, Args)]
struct Flags {
    /// JSON file with the subcommand's fields; defaults are used otherwise.
    #[arg(long)]
    config: Option<PathBuf>,
    /// cm, nesterov, aggmo, aggmo-gen or beta-avg.
    #[arg(long)]
    method: Option<String>,
    /// Damping coefficients, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    betas: Option<Vec<f64>>,
    #[arg(long)]
    damping_a: Option<f64>,
    #[arg(long)]
    damping_k: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    /// Learning rates, comma separated.
    #[arg(long, value_delimiter = ',')]
    lr_grid: Option<Vec<f64>>,
    #[arg(long)]
    steps: Option<u64>,
    /// Seeds, comma separated.
    #[arg(long = "seed", value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// Output directory; falls back to $AGGMO_OUT_DIR, then ./aggmo-out.
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv or json.
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    /// exact or approximate.
    #[arg(long)]
    mode: Option<String>,
}

impl Flags {
    fn overrides(&self) -> Result<Overrides> {
        Ok(Overrides {
            method: self
                .method
                .as_deref()
                .map(str::parse::<MethodName>)
                .transpose()?,
            betas: self.betas.clone(),
            damping_a: self.damping_a,
            damping_k: self.damping_k,
            lr: self.lr,
            lr_grid: self.lr_grid.clone(),
            steps: self.steps,
            seeds: self.seeds.clone(),
            out: self.out.clone(),
            format: self
                .format
                .as_deref()
                .map(str::parse::<Format>)
                .transpose()?,
            trials: self.trials,
            lambda: self.lambda,
            mode: self
                .mode
                .as_deref()
                .map(str::parse::<ModeSpec>)
                .transpose()?,
        })
    }
}

fn load(command: &str, flags: &Flags) -> Result<RunConfig> {
    let mut config = match &flags.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::io(format!("reading {}", path.display()), e))?;
            RunConfig::from_json(command, &text)?
        }
        None => RunConfig::default_for(command)?,
    };
    config.apply(&flags.overrides()?)?;
    Ok(config)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, flags) = match &cli.command {
        Command::Optimize(f) => ("optimize", f),
        Command::FunnelRegression(f) => ("funnel-regression", f),
        Command::SweepRates(f) => ("sweep-rates", f),
        Command::EquivCheck(f) => ("equiv-check", f),
        Command::RegretCheck(f) => ("regret-check", f),
    };
    match load(name, flags).and_then(|c| execute(&c)) {
        Ok(manifest) => {
            println!(
                "{}",
                serde_json::to_string_pretty(&manifest.summary).unwrap_or_default()
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.record());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
