//! `lsw`: construct, validate, compile and simulate the trine joint
//! measurements, then report the anticorrelation test.
//!
//! Exit status: 0 when the run violates the bound, 1 when it does not, 2 when
//! a validation contract fails or the arguments are unusable.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use lsw_core::harness::{
    self, render_circuits, render_marginals, render_report, render_sweep, render_validation, ExperimentConfig,
    OutputFormat, Overrides, StateSpec,
};
use lsw_core::lsw::{sweep_eta, DEFAULT_SWEEP_STEPS, LIMIT_OFFSET};
use lsw_core::povm::trine_eta_max;

#[derive(Debug, Parser)]
#[command(name = "lsw", version, about = "Noisy trine joint measurements and the anticorrelation bound")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Sharpness of the noisy observables.
    #[arg(long, global = true)]
    eta: Option<f64>,

    /// phi0, H, V, D, R, or amplitudes "re0,im0,re1,im1".
    #[arg(long, global = true, allow_hyphen_values = true)]
    state: Option<String>,

    /// Shots per joint measurement.
    #[arg(long, global = true)]
    shots: Option<u64>,

    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Independent sampling streams per joint measurement.
    #[arg(long, global = true)]
    shards: Option<u32>,

    /// TOML file with eta, axes, state, shots, seed, format, shards.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Write output to this file instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Full pipeline with sampling.
    Report,
    /// Exact trine values on the optimal state over a range of eta.
    Sweep {
        #[arg(long, default_value_t = 2.0 / 3.0 + LIMIT_OFFSET)]
        eta_min: f64,
        #[arg(long, default_value_t = trine_eta_max())]
        eta_max: f64,
        #[arg(long, default_value_t = DEFAULT_SWEEP_STEPS)]
        steps: usize,
    },
    /// Marginal sums over H, V, R, D against the noisy observables.
    Marginals,
    /// Wave-plate angles and transmissions for every stage.
    Compile,
    /// Validations only.
    Check,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Table,
    Object,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Table => OutputFormat::Table,
            Format::Object => OutputFormat::Object,
        }
    }
}

fn config(cli: &Cli) -> Result<ExperimentConfig> {
    let base = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    let state = cli.state.as_deref().map(str::parse::<StateSpec>).transpose()?;
    Ok(base.apply(&Overrides {
        eta: cli.eta,
        state,
        shots: cli.shots,
        seed: cli.seed,
        format: cli.format.map(Into::into),
        shards: cli.shards,
    }))
}

/// Rendered text and whether the bound was violated.
fn execute(cli: &Cli) -> Result<(String, bool)> {
    let cfg = config(cli)?;
    let format = cfg.format;
    Ok(match &cli.command {
        Command::Report => {
            let rep = harness::run(&cfg)?;
            (render_report(&rep, format)?, rep.violated())
        }
        Command::Sweep { eta_min, eta_max, steps } => {
            let rows = sweep_eta(*eta_min, *eta_max, *steps)?;
            let violated = rows.iter().any(|r| r.margin > 0.0);
            (render_sweep(&rows, format)?, violated)
        }
        Command::Marginals => (render_marginals(&harness::marginal_table(&cfg)?, format)?, true),
        Command::Compile => (render_circuits(&harness::compile_circuits(&cfg)?, format)?, true),
        Command::Check => (render_validation(&harness::check(&cfg)?, format)?, true),
    })
}

fn emit(cli: &Cli, text: &str) -> Result<()> {
    match &cli.out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli).and_then(|(text, violated)| emit(&cli, &text).map(|()| violated)) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
