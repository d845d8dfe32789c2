//! Batch command line: one TOML config in, JSON/CSV files out.
//!
//! Exit codes: 0 on success, 1 on validation errors, 2 on numerical failures.

mod commands;
pub mod config;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::error::{Error, Result};
pub use commands::{execute, Context, Outputs};
pub use config::{ProblemConfig, CONFIG_VERSION};

#[derive(Debug, Parser)]
#[command(name = "vortex", version, about = "Point vortices with fixed sources on closed surfaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Problem configuration (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory receiving output files.
    #[arg(long, global = true, default_value = "out")]
    pub out_dir: PathBuf,
    /// Overrides the seed from the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for parallel searches.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Parse and validate inputs without computing or writing anything.
    #[arg(long, global = true)]
    pub dry_run: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Hamiltonian, Phi, Psi and regular parts at the configured positions.
    Energy,
    /// Riemannian gradient of the Hamiltonian.
    Grad,
    /// Integrate the vortex flow.
    Simulate,
    /// Multi-start critical point search.
    FindEq,
    /// Collapse slopes, separation estimates and fiber intersections in the plane.
    FiberScan,
    /// Maximal total vortex count for the capacities.
    Maxn,
    /// Coupling feasibility, block ordering and exhaustive coupling search.
    Coupling,
    /// Strength conditions and the sign of the curvature quantity.
    Check,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Energy => "energy",
            Command::Grad => "grad",
            Command::Simulate => "simulate",
            Command::FindEq => "find-eq",
            Command::FiberScan => "fiber-scan",
            Command::Maxn => "maxn",
            Command::Coupling => "coupling",
            Command::Check => "check",
        }
    }
}

/// Exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Singularity { .. } | Error::Numerical(_) => 2,
        _ => 1,
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run_cli(&cli) {
        Ok(summary) => {
            print!("{summary}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn run_cli(cli: &Cli) -> Result<String> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::validation("--config is required"))?;
    let cfg = ProblemConfig::from_path(path)?;
    let ctx = Context {
        seed: cli.seed.unwrap_or(cfg.seed),
        threads: cli.threads,
        dry_run: cli.dry_run,
    };
    let out = execute(cli.command, &cfg, &ctx)?;
    if !ctx.dry_run {
        fs::create_dir_all(&cli.out_dir)?;
        for (name, contents) in &out.files {
            write_atomic(&cli.out_dir.join(name), contents)?;
        }
    }
    Ok(out.summary)
}

/// Writes through a temporary file in the same directory and renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| Error::validation(format!("bad output path {}", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp", name.to_string_lossy()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}
