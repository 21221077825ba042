use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use floquet_cli::config::{RunMode, SystemConfig};
use floquet_cli::model::{modulation_profile, prepare};
use floquet_cli::output::num;
use floquet_cli::{parse_config, run_scenario, ConfigError, RunOptions};
use floquet_core::parallel::Execution;
use floquet_core::qubit::pq_table;

/// Exit status for a run whose thermodynamic checks failed.
const EXIT_LAW_VIOLATION: u8 = 3;
/// Exit status for configuration errors.
const EXIT_CONFIG: u8 = 2;

#[derive(Parser)]
#[command(
    name = "floquet-thermo",
    version,
    about = "Floquet-Markov thermodynamics of driven open quantum systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its artifacts.
    Run {
        config: PathBuf,
        /// Output directory (overrides `output.directory`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override `run.mode`.
        #[arg(long, value_enum)]
        mode: Option<RunMode>,
        /// Suppress the summary on stdout.
        #[arg(long)]
        quiet: bool,
    },
    /// Parse the config and build the generator without running anything.
    Validate { config: PathBuf },
    /// Print the harmonic weights P(q) of a qubit scenario as CSV.
    Pq { config: PathBuf },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<ConfigError>().is_some() {
                ExitCode::from(EXIT_CONFIG)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}

fn dispatch(cmd: Command) -> Result<ExitCode> {
    match cmd {
        Command::Run {
            config,
            out,
            mode,
            quiet,
        } => {
            let cfg = parse_config(&config)?;
            let outcome = run_scenario(&cfg, &RunOptions { out_dir: out, mode })
                .with_context(|| format!("running {}", config.display()))?;
            if !quiet {
                for line in &outcome.summary {
                    println!("{line}");
                }
                for f in &outcome.files {
                    println!("wrote {}", f.display());
                }
            }
            if outcome.violations.is_empty() {
                Ok(ExitCode::SUCCESS)
            } else {
                for v in &outcome.violations {
                    eprintln!("law check failed: {v}");
                }
                Ok(ExitCode::from(EXIT_LAW_VIOLATION))
            }
        }
        Command::Validate { config } => {
            let cfg = parse_config(&config)?;
            let p = prepare(&cfg, Execution::Parallel)?;
            println!(
                "ok: {} (dim {}, {} baths, {} channels)",
                cfg.name.as_deref().unwrap_or("unnamed"),
                p.bundle.dim(),
                p.bundle.baths.len(),
                p.bundle.channels.len()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Pq { config } => {
            let cfg = parse_config(&config)?;
            if !matches!(cfg.system, SystemConfig::Qubit { .. }) {
                anyhow::bail!("`pq` needs a qubit scenario");
            }
            let profile = modulation_profile(&cfg)?;
            let table = pq_table(&profile, cfg.floquet.q_max.unwrap_or_default(), Execution::Parallel)
                .context("qubit-workbench: P(q) table")?;
            let mut w = csv::Writer::from_writer(std::io::stdout().lock());
            w.write_record(["q", "xi_re", "xi_im", "p"])?;
            for e in &table.entries {
                w.write_record([e.q.to_string(), num(e.xi_re), num(e.xi_im), num(e.p)])?;
            }
            w.flush()?;
            eprintln!(
                "captured mass {} (tail {})",
                num(table.captured_mass),
                num(table.tail_bound)
            );
            Ok(ExitCode::SUCCESS)
        }
    }
}
