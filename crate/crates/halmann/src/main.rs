use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use halmann::commands::{self, exit_code, Outcome};
use halmann::config::Overrides;

#[derive(Parser)]
#[command(
    name = "halmann",
    version,
    about = "Alternating Halpern-Mann iterations and their certified rates"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Largest index at which rates are checked
    #[arg(long, global = true)]
    budget: Option<u64>,
    /// Largest k in rate tables and claims
    #[arg(long = "kmax", global = true)]
    k_max: Option<u64>,
    /// Slack for axioms and trace inequalities
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the iteration and write the trace CSV and constants
    Run { config: PathBuf },
    /// Write the table of rates
    Rates { config: PathBuf },
    /// Check axioms, moduli, trace inequalities and rate claims
    Verify { config: PathBuf },
    /// Verify every config in a directory
    Suite { dir: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let overrides = Overrides {
        budget: cli.budget,
        k_max: cli.k_max,
        tol: cli.tol,
        seed: cli.seed,
        out: cli.out,
    };
    let mut stdout = std::io::stdout().lock();
    let code = match &cli.command {
        Command::Suite { dir } => commands::suite(dir, &overrides, &mut stdout),
        Command::Run { config } | Command::Rates { config } | Command::Verify { config } => {
            let outcome: Outcome =
                commands::load(config, &overrides).and_then(|(cfg, problem)| match cli.command {
                    Command::Run { .. } => commands::run(&cfg, &problem, &mut stdout),
                    Command::Rates { .. } => commands::rates(&cfg, &problem, &mut stdout),
                    _ => commands::verify(&cfg, &problem, &mut stdout),
                });
            if let Err(f) = &outcome {
                eprintln!("{f}");
            }
            exit_code(&outcome)
        }
    };
    ExitCode::from(code as u8)
}
