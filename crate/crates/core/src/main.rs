use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cs_recovery::bench::Algorithm;
use cs_recovery::cli::{self, CliError, RunManifest};

#[derive(Parser)]
#[command(name = "cs-recovery", version, about = "Sparse recovery benchmarks: OMP, IHT, SIRA")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Flat key=value run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (created if missing).
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Worker threads for Monte-Carlo trials; 1 keeps timings clean.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Write the time-domain signal and its DFT magnitudes.
    Generate {
        #[command(flatten)]
        common: Common,
    },
    /// Run a single recovery trial.
    Recover {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = parse_algorithm)]
        algorithm: Algorithm,
        /// Number of available samples; defaults to the first `m_values` entry.
        #[arg(long)]
        m: Option<usize>,
        /// Defaults to the first `seeds` entry.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Algorithms x m_values x seeds, with per-cell summaries.
    Sweep {
        #[command(flatten)]
        common: Common,
    },
    /// Smallest measurement count meeting the success criterion.
    Minm {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = parse_algorithm)]
        algorithm: Algorithm,
        /// Evaluate the whole range instead of stopping at the first hit.
        #[arg(long)]
        full_curve: bool,
    },
}

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    s.parse().map_err(|e: cs_recovery::Error| e.to_string())
}

fn load(common: &Common) -> Result<RunManifest, CliError> {
    RunManifest::load(&common.config, &common.out, common.jobs)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Generate { common } => {
            let manifest = load(&common)?;
            for path in cli::cmd_generate(&manifest)? {
                eprintln!("wrote {}", path.display());
            }
        }
        Command::Recover {
            common,
            algorithm,
            m,
            seed,
        } => {
            let manifest = load(&common)?;
            let m = match m.or_else(|| manifest.config.m_values.first().copied()) {
                Some(m) => m,
                None => return Err(CliError::Argument("no --m given and no m_values in config".into())),
            };
            let seed = seed
                .or_else(|| manifest.config.seeds.first().copied())
                .unwrap_or(0);
            let out = cli::cmd_recover(&manifest, algorithm, m, seed)?;
            println!("{}", out.summary_line);
            eprintln!("wrote {}", out.path.display());
        }
        Command::Sweep { common } => {
            let manifest = load(&common)?;
            let (records, paths) = cli::cmd_sweep(&manifest)?;
            let failed = records.iter().filter(|r| r.failed()).count();
            eprintln!("{} trials, {failed} failed", records.len());
            for path in paths {
                eprintln!("wrote {}", path.display());
            }
        }
        Command::Minm {
            common,
            algorithm,
            full_curve,
        } => {
            let manifest = load(&common)?;
            let out = cli::cmd_minm(&manifest, algorithm, full_curve)?;
            println!("{}", out.status_line(algorithm));
            eprintln!("wrote {}", out.path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            println!("{}", e.error_line());
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
