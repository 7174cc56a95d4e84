use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use optonet_cli::{metadata_path, preset, run, worker_count, write_csv, write_metadata, CliError, RunConfig};

#[derive(Parser)]
#[command(name = "optonet", version, about = "Steady-state entanglement sweeps for optomechanical networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the sweep described by a JSON config.
    Run {
        config: PathBuf,
        /// Output CSV (default: the config's stem with a .csv extension).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Omit timestamps so repeated runs produce identical bytes.
        #[arg(long)]
        reproducible: bool,
    },
    /// Generate a figure dataset: fig2a, fig2b, fig3, fig4, fig6, fig8.
    Preset {
        name: String,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long)]
        reproducible: bool,
        /// Print the preset's config instead of running it.
        #[arg(long)]
        print_config: bool,
    },
    /// Check a config without running it.
    Validate { config: PathBuf },
}

fn load(path: &Path) -> Result<RunConfig, CliError> {
    RunConfig::from_json(&std::fs::read_to_string(path)?)
}

fn execute(cfg: &RunConfig, csv_path: &Path, reproducible: bool) -> Result<(), CliError> {
    let workers = worker_count();
    log::info!("{} grid points on {workers} workers", cfg.grid().len());
    let result = run(cfg, workers)?;
    write_csv(&result, csv_path, reproducible)?;
    write_metadata(&result, &metadata_path(csv_path), reproducible)?;
    let failed = result.rows.iter().filter(|r| r.error.is_some()).count();
    println!("wrote {} rows to {} ({failed} without value)", result.rows.len(), csv_path.display());
    Ok(())
}

fn main_inner(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { config, out, reproducible } => {
            let cfg = load(&config)?;
            let out = out.unwrap_or_else(|| PathBuf::from(config.file_stem().unwrap_or_default()).with_extension("csv"));
            execute(&cfg, &out, reproducible)
        }
        Command::Preset { name, out, reproducible, print_config } => {
            let cfg = preset(&name)?;
            if print_config {
                println!("{}", cfg.to_json());
                return Ok(());
            }
            std::fs::create_dir_all(&out)?;
            execute(&cfg, &out.join(format!("{name}.csv")), reproducible)
        }
        Command::Validate { config } => {
            let cfg = load(&config)?;
            println!("ok: {:?}, {} grid points, {} observables", cfg.model, cfg.grid().len(), cfg.outputs.len());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    // Per-point regime warnings from the closed forms are summarised by the sweep.
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn,optonet::analytic=error")).init();
    match main_inner(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
