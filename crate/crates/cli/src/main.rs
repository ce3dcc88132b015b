use std::path::PathBuf;
use std::process::ExitCode;

use cantor_k::crossed::FlipMode;
use cantor_k_cli::{bundled, emit_report, run_scenario, run_text, Format, Options, BUNDLED};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "cantor-k", version, about = "Exact K-theoretic invariants of circle extensions of odometers")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Flip {
    Auto,
    Never,
    Force,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a scenario file (or the name of a bundled scenario).
    Run {
        scenario: PathBuf,
        /// Exit with status 2 when any verdict is unknown.
        #[arg(long)]
        strict: bool,
        /// Run independent commands concurrently.
        #[arg(long)]
        parallel: bool,
        /// Default search depth for commands without their own budget.
        #[arg(long, env = "CANTOR_K_BUDGET", default_value_t = 12)]
        budget_level: usize,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Whether the approximate K-conjugacy decision may use `mean ↦ 1 − mean`.
        #[arg(long, value_enum, default_value_t = Flip::Auto)]
        flip: Flip,
    },
    /// List bundled scenarios, or print one.
    Examples { name: Option<String> },
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Cmd::Examples { name: None } => {
            for (name, _) in BUNDLED {
                println!("{name}");
            }
            ExitCode::SUCCESS
        }
        Cmd::Examples { name: Some(name) } => match bundled(&name) {
            Some(text) => {
                print!("{text}");
                ExitCode::SUCCESS
            }
            None => {
                eprintln!("error: no bundled scenario named `{name}`");
                ExitCode::from(1)
            }
        },
        Cmd::Run {
            scenario,
            strict,
            parallel,
            budget_level,
            format,
            flip,
        } => {
            let opts = Options {
                parallel,
                budget_level,
                flip: match flip {
                    Flip::Auto => FlipMode::Auto,
                    Flip::Never => FlipMode::Never,
                    Flip::Force => FlipMode::Force,
                },
            };
            let report = match (scenario.exists(), scenario.to_str().and_then(bundled)) {
                (false, Some(text)) => run_text(text, &opts),
                _ => run_scenario(&scenario, &opts),
            };
            match report {
                Ok(r) => {
                    print!("{}", emit_report(&r, format));
                    ExitCode::from(r.exit_code(strict) as u8)
                }
                Err(e) => {
                    eprintln!("error: {}: {e}", scenario.display());
                    ExitCode::from(1)
                }
            }
        }
    }
}
