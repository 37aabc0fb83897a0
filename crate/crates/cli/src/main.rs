use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::{error, info};
use psi_cli::{execute, parse_config, write_outputs, Command, Job, RunConfig, RunError};

/// Few-photon phase-shifting interferometry simulator.
#[derive(Parser)]
#[command(name = "psi-sim", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Simulate (noisy) phase-shifted interferograms of a scene.
    Simulate(Common),
    /// Recover phase and amplitude from saved interferograms.
    Reconstruct {
        #[command(flatten)]
        common: Common,
        /// Interferogram manifest written by `simulate`.
        #[arg(long)]
        manifest: PathBuf,
    },
    /// Qudit fidelity versus illumination, readout noise and pixel binning.
    QuditExperiment(Common),
    /// Qudit fidelity map over illumination and readout noise.
    SweepMap(Common),
    /// Phase error of a continuous wavefront against a high-flux reference.
    ContinuousExperiment(Common),
}

#[derive(Args)]
struct Common {
    /// Run configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed; overrides `[noise] seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; overrides `[output] dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (defaults to all cores). Results do not depend on it.
    #[arg(long)]
    jobs: Option<usize>,
    /// Only log errors.
    #[arg(long)]
    quiet: bool,
}

const DEFAULT_RECONSTRUCT_CONFIG: &str = "[scene]\ntype = lens\n";

fn load_config(common: &Common, command: Command) -> Result<(RunConfig, PathBuf), RunError> {
    let (text, base) = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| {
                RunError::Config(format!("cannot read config {}: {e}", path.display()))
            })?;
            let base = path
                .parent()
                .map_or_else(|| PathBuf::from("."), Path::to_path_buf);
            (text, base)
        }
        None if command == Command::Reconstruct => {
            (DEFAULT_RECONSTRUCT_CONFIG.to_string(), PathBuf::from("."))
        }
        None => {
            return Err(RunError::Config(format!(
                "{} needs --config",
                command.name()
            )))
        }
    };
    let mut cfg = parse_config(&text, &base).map_err(|e| RunError::Config(e.to_string()))?;
    if let Some(seed) = common.seed {
        cfg.noise.seed = seed;
    }
    Ok((cfg, base))
}

fn run(command: Command, common: &Common, manifest: Option<&Path>) -> Result<(), RunError> {
    let (cfg, base) = load_config(common, command)?;
    let out_dir = common.out.clone().unwrap_or_else(|| cfg.output_dir.clone());
    let job = Job {
        command,
        config: &cfg,
        base_dir: &base,
        manifest,
    };
    let outputs = match common.jobs {
        Some(0) => return Err(RunError::Config("--jobs must be >= 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(anyhow::Error::from)?
            .install(|| execute(&job))?,
        None => execute(&job)?,
    };
    let written = write_outputs(&out_dir, &outputs)?;
    info!("wrote {} files to {}", written.len(), out_dir.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, common, manifest) = match &cli.command {
        Sub::Simulate(c) => (Command::Simulate, c, None),
        Sub::Reconstruct { common, manifest } => {
            (Command::Reconstruct, common, Some(manifest.as_path()))
        }
        Sub::QuditExperiment(c) => (Command::QuditExperiment, c, None),
        Sub::SweepMap(c) => (Command::SweepMap, c, None),
        Sub::ContinuousExperiment(c) => (Command::ContinuousExperiment, c, None),
    };
    let level = if common.quiet {
        log::LevelFilter::Error
    } else {
        log::LevelFilter::Info
    };
    env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .init();
    match run(command, common, manifest) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!("{e:#}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
