use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use morse_shrink::config::parse_config;
use morse_shrink::pipeline::{run_pipeline, RunOptions};
use morse_shrink::report::{emit_reports, render_report};

#[derive(Parser)]
#[command(version, about = "Conjugate points, crossing forms and bifurcation under domain shrinking")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every stage for a configuration file and write the reports.
    Run {
        config: PathBuf,
        /// Output directory (overrides [output] dir).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Interior grid nodes (overrides [sweep] n).
        #[arg(long)]
        grid: Option<usize>,
        /// Points of the r-grid (overrides [sweep] r_points).
        #[arg(long)]
        rgrid: Option<usize>,
        #[arg(long)]
        skip_bifurcation: bool,
    },
}

fn main() -> ExitCode {
    let Command::Run {
        config,
        out,
        grid,
        rgrid,
        skip_bifurcation,
    } = Cli::parse().command;

    let text = match std::fs::read_to_string(&config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", config.display());
            return ExitCode::from(1);
        }
    };
    let mut spec = match parse_config(&text) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {}: {e}", config.display());
            return ExitCode::from(1);
        }
    };
    if let Some(n) = grid {
        if n < 3 {
            eprintln!("error: --grid must be at least 3");
            return ExitCode::from(1);
        }
        spec.sweep.n = n;
    }
    if let Some(m) = rgrid {
        if m < 2 {
            eprintln!("error: --rgrid must be at least 2");
            return ExitCode::from(1);
        }
        spec.sweep.r_points = m;
    }
    if let Some(dir) = out {
        spec.output_dir = dir;
    }

    let bundle = run_pipeline(&spec, RunOptions { skip_bifurcation });
    print!("{}", render_report(&bundle));
    if let Err(e) = emit_reports(&bundle, &spec.output_dir) {
        eprintln!("error: {e}");
        return ExitCode::from(3);
    }
    if let Some(f) = &bundle.failure {
        eprintln!("error: {}", f.message);
    }
    ExitCode::from(bundle.exit_code() as u8)
}
