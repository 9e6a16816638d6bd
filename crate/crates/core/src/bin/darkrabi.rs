use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use darkrabi::cli::config::Panel;
use darkrabi::cli::run::{run_figure, run_path, RunOptions};
use darkrabi::cli::CliError;

#[derive(Parser)]
#[command(name = "darkrabi", version, about = "Spectra, dark states and symmetries of two-qubit Rabi models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every task listed in a JSON config.
    Run {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads; overrides DARKRABI_THREADS.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Regenerate one of the shipped figure panels (1a, 1b, 2a, 2b, 3a, 3b, 3c, 3d).
    Figure {
        panel: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
    },
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let manifest = match cli.command {
        Command::Run { config, out, threads } => run_path(&config, &RunOptions { out_dir: out, threads })?,
        Command::Figure { panel, out, threads } => {
            let panel = Panel::parse(&panel).ok_or_else(|| CliError::Parse(format!("unknown panel `{panel}`")))?;
            run_figure(panel, &RunOptions { out_dir: out, threads })?
        }
    };
    for task in &manifest.tasks {
        log::info!("{}: {:?}", task.task, task.verdict);
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("darkrabi: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
