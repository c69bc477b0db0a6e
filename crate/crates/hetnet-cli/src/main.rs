//! `hetnet` — coverage probability, ASE and density optimization for
//! multiuser MIMO heterogeneous networks, emitting CSV with an embedded
//! run manifest.
//!
//! Exit codes: 0 success, 2 configuration error, 3 every sweep point
//! infeasible, 4 numerical non-convergence.

mod commands;
mod config;
mod output;

use clap::{Parser, Subcommand};
use commands::{PsMode, SimulateParams, TradeoffMethod, TradeoffParams};
use output::RunManifest;
use std::path::PathBuf;
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Numeric(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 4,
            CliError::Io(_) => 1,
        }
    }
}

/// Post-run status for commands that can partially succeed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandStatus {
    Success,
    InfeasibleOnly,
    NonConverged,
}

impl CommandStatus {
    fn exit_code(self) -> i32 {
        match self {
            CommandStatus::Success => 0,
            CommandStatus::InfeasibleOnly => 3,
            CommandStatus::NonConverged => 4,
        }
    }
}

#[derive(Parser)]
#[command(name = "hetnet", version, about = "Coverage and ASE analysis for multiuser MIMO HetNets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact and asymptotic success probability over a threshold sweep.
    Ps {
        /// Network configuration JSON.
        config: PathBuf,
        /// Sweep start, dB.
        #[arg(long, allow_hyphen_values = true)]
        gamma_db_from: f64,
        /// Sweep end (inclusive), dB.
        #[arg(long, allow_hyphen_values = true)]
        gamma_db_to: f64,
        /// Sweep step, dB.
        #[arg(long, default_value_t = 1.0)]
        gamma_db_step: f64,
        #[arg(long, value_enum, default_value_t = PsMode::Both)]
        mode: PsMode,
        /// Output CSV path (stdout when omitted).
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Maximum ASE under a link-reliability floor, over a theta sweep.
    Tradeoff {
        config: PathBuf,
        #[arg(long)]
        theta_from: f64,
        #[arg(long)]
        theta_to: f64,
        #[arg(long, default_value_t = 0.05)]
        theta_step: f64,
        /// SIR threshold, dB.
        #[arg(long, allow_hyphen_values = true)]
        gamma_db: f64,
        #[arg(long, value_enum)]
        method: TradeoffMethod,
        /// Random initializations (general method).
        #[arg(long, default_value_t = 20)]
        restarts: usize,
        /// Convergence threshold (general method).
        #[arg(long, default_value_t = 1e-6)]
        epsilon: f64,
        /// Iteration cap per solver loop (general method).
        #[arg(long, default_value_t = 100)]
        max_iters: usize,
        /// Seed for the initialization draws (general method).
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Lattice subdivisions per axis (grid method).
        #[arg(long, default_value_t = 100)]
        resolution: usize,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Seeded Monte Carlo estimate of the success probability.
    Simulate {
        config: PathBuf,
        #[arg(long)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Thresholds in dB, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        gamma_db: Vec<f64>,
        /// Simulation disc radius in meters (0 = automatic).
        #[arg(long, default_value_t = 0.0)]
        region_radius_m: f64,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Per-tier diagnostics: c/d ratios, density monotonicity, reliability ceiling.
    Diagnose {
        config: PathBuf,
        /// SIR threshold, dB.
        #[arg(long, allow_hyphen_values = true)]
        gamma_db: f64,
        /// Optional CSV output path.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

fn init_thread_pool() -> Result<(), CliError> {
    match std::env::var("HETNET_THREADS") {
        Err(_) => Ok(()),
        Ok(raw) => {
            let n: usize = raw
                .trim()
                .parse()
                .map_err(|_| CliError::Config(format!("HETNET_THREADS must be an integer, got {raw:?}")))?;
            if n == 0 {
                return Ok(()); // auto
            }
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| CliError::Config(format!("thread pool: {e}")))
        }
    }
}

fn run() -> Result<CommandStatus, CliError> {
    init_thread_pool()?;
    let cli = Cli::parse();
    let started = Instant::now();
    match cli.command {
        Command::Ps {
            config,
            gamma_db_from,
            gamma_db_to,
            gamma_db_step,
            mode,
            output,
        } => {
            let loaded = config::load(&config)?;
            let grid = commands::sweep_grid(gamma_db_from, gamma_db_to, gamma_db_step)?;
            let (doc, status) = commands::cmd_ps(&loaded, &grid, mode)?;
            let manifest = RunManifest {
                command: "ps",
                config_path: loaded.path.clone(),
                config_sha256: loaded.sha256.clone(),
                args: vec![
                    ("gamma_db_from".into(), format!("{gamma_db_from}")),
                    ("gamma_db_to".into(), format!("{gamma_db_to}")),
                    ("gamma_db_step".into(), format!("{gamma_db_step}")),
                    ("mode".into(), format!("{mode:?}").to_lowercase()),
                ],
                seed: None,
                duration: started.elapsed(),
                output,
            };
            doc.write(&manifest)?;
            Ok(status)
        }
        Command::Tradeoff {
            config,
            theta_from,
            theta_to,
            theta_step,
            gamma_db,
            method,
            restarts,
            epsilon,
            max_iters,
            seed,
            resolution,
            output,
        } => {
            let loaded = config::load(&config)?;
            let params = TradeoffParams {
                grid_theta: commands::sweep_grid(theta_from, theta_to, theta_step)?,
                gamma_db,
                method,
                restarts,
                epsilon,
                max_iters,
                seed,
                resolution,
            };
            let (doc, status) = commands::cmd_tradeoff(&loaded, &params)?;
            let manifest = RunManifest {
                command: "tradeoff",
                config_path: loaded.path.clone(),
                config_sha256: loaded.sha256.clone(),
                args: vec![
                    ("theta_from".into(), format!("{theta_from}")),
                    ("theta_to".into(), format!("{theta_to}")),
                    ("theta_step".into(), format!("{theta_step}")),
                    ("gamma_db".into(), format!("{gamma_db}")),
                    ("method".into(), format!("{method:?}").to_lowercase()),
                    ("restarts".into(), format!("{restarts}")),
                    ("epsilon".into(), format!("{epsilon}")),
                    ("max_iters".into(), format!("{max_iters}")),
                    ("resolution".into(), format!("{resolution}")),
                ],
                seed: Some(seed),
                duration: started.elapsed(),
                output,
            };
            doc.write(&manifest)?;
            Ok(status)
        }
        Command::Simulate {
            config,
            trials,
            seed,
            gamma_db,
            region_radius_m,
            output,
        } => {
            let loaded = config::load(&config)?;
            let params = SimulateParams {
                trials,
                seed,
                gamma_db,
                region_radius_m,
            };
            let (doc, status) = commands::cmd_simulate(&loaded, &params)?;
            let manifest = RunManifest {
                command: "simulate",
                config_path: loaded.path.clone(),
                config_sha256: loaded.sha256.clone(),
                args: vec![
                    ("trials".into(), format!("{trials}")),
                    (
                        "gamma_db".into(),
                        params
                            .gamma_db
                            .iter()
                            .map(|v| format!("{v}"))
                            .collect::<Vec<_>>()
                            .join(";"),
                    ),
                    ("region_radius_m".into(), format!("{region_radius_m}")),
                ],
                seed: Some(seed),
                duration: started.elapsed(),
                output,
            };
            doc.write(&manifest)?;
            Ok(status)
        }
        Command::Diagnose {
            config,
            gamma_db,
            output,
        } => {
            let loaded = config::load(&config)?;
            let report = commands::cmd_diagnose(&loaded, gamma_db)?;
            print!("{}", report.text);
            if output.is_some() {
                let manifest = RunManifest {
                    command: "diagnose",
                    config_path: loaded.path.clone(),
                    config_sha256: loaded.sha256.clone(),
                    args: vec![("gamma_db".into(), format!("{gamma_db}"))],
                    seed: None,
                    duration: started.elapsed(),
                    output,
                };
                report.doc.write(&manifest)?;
            }
            Ok(CommandStatus::Success)
        }
    }
}

fn main() {
    match run() {
        Ok(status) => std::process::exit(status.exit_code()),
        Err(err) => {
            eprintln!("error: {err}");
            std::process::exit(err.exit_code());
        }
    }
}
