use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use plasmon_cqed::{run, validate, RunOptions};

#[derive(Parser)]
#[command(
    name = "plasmon-cqed",
    version,
    about = "Emitter / metal-nanosphere coupling simulations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the task described by a JSON scenario file.
    Run {
        config: PathBuf,
        /// Output directory; overrides run.output_dir.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads for parameter sweeps.
        #[arg(long)]
        threads: Option<usize>,
        /// Also run the built-in consistency checks.
        #[arg(long)]
        verify: bool,
    },
    /// Recompute the checksums listed in an output directory's manifest.
    Validate { dir: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            out,
            threads,
            verify,
        } => match run(&RunOptions {
            config,
            out,
            threads,
            verify,
        }) {
            Ok(m) => {
                for f in &m.outputs {
                    println!("{}  {}", f.sha256, f.file);
                }
                println!("{} finished in {:.2} s", m.task, m.wall_clock_s);
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(e.exit_code())
            }
        },
        Command::Validate { dir } => match validate(&dir) {
            Ok(bad) if bad.is_empty() => {
                println!("all outputs match {}", dir.join(plasmon_cqed::MANIFEST).display());
                ExitCode::SUCCESS
            }
            Ok(bad) => {
                for m in bad {
                    eprintln!("{}: {}", m.file, m.problem);
                }
                ExitCode::from(3)
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(e.exit_code())
            }
        },
    }
}
