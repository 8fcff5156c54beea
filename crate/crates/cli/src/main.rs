use std::process::ExitCode;

use clap::{Parser, Subcommand};
use olfkit::problems::BUILTIN_NAMES;
use olfkit_cli::commands::{cmd_bench, cmd_run, cmd_verify, BenchArgs, VerifyArgs};
use olfkit_cli::config::{builtin_spec, RunArgs};
use olfkit_cli::EXIT_CONFIG;

#[derive(Parser)]
#[command(name = "olfkit", version, about = "Optimizer flows with a prescribed Lyapunov decay")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one problem and write its trajectory CSV
    Run(RunArgs),
    /// Run a benchmark suite and write per-case CSVs plus a summary
    Bench(BenchArgs),
    /// Re-check the decay law on a recorded trajectory
    Verify(VerifyArgs),
    /// List the built-in problems
    List,
    /// Print a built-in problem's spec as JSON (usable as `problem` in a config)
    Show { name: String },
}

fn dispatch(command: Command) -> anyhow::Result<u8> {
    match command {
        Command::Run(args) => cmd_run(&args),
        Command::Bench(args) => cmd_bench(&args),
        Command::Verify(args) => cmd_verify(&args),
        Command::List => {
            for name in BUILTIN_NAMES {
                println!("{name}");
            }
            Ok(0)
        }
        Command::Show { name } => {
            println!("{}", serde_json::to_string_pretty(&builtin_spec(&name)?)?);
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG } else { 0 });
        }
    };
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}
