use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dnls::commands::{run, Command};
use dnls::config::RunConfig;
use dnls::error::AppError;

#[derive(Parser)]
#[command(version, about = "Inverse scattering for the derivative NLS equation")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// JSON run configuration
    #[arg(short, long, global = true)]
    config: Option<PathBuf>,
    /// output directory (overrides the config's out_dir)
    #[arg(short, long, global = true)]
    out: Option<PathBuf>,
    /// multiplies the contour node counts
    #[arg(short, long, global = true)]
    resolution: Option<f64>,
    /// worker threads for x-sweeps (default: all cores)
    #[arg(short = 'j', long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// scattering data and jump samples
    Direct,
    /// potentials at every configured time
    EvolveInvert,
    /// inverse of the direct map at t = 0 against the input
    Roundtrip,
    /// IST against the pseudo-spectral integrator
    ComparePde,
    /// solvability and consistency diagnostics
    Diag,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match exec(&cli) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn exec(cli: &Cli) -> Result<Vec<PathBuf>, AppError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| AppError::Config("--config is required".into()))?;
    let mut cfg = RunConfig::load(path)?;
    if let Some(r) = cli.resolution {
        cfg.contour.resolution = r;
        cfg.validate()?;
    }
    let out = cli
        .out
        .clone()
        .or_else(|| cfg.out_dir.as_ref().map(|d| cfg.base_dir.join(d)))
        .unwrap_or_else(|| PathBuf::from("out"));
    let cmd = match cli.cmd {
        Cmd::Direct => Command::Direct,
        Cmd::EvolveInvert => Command::EvolveInvert,
        Cmd::Roundtrip => Command::Roundtrip,
        Cmd::ComparePde => Command::ComparePde,
        Cmd::Diag => Command::Diag,
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| AppError::Config(e.to_string()))?;
    pool.install(|| run(cmd, &cfg, &out))
}
