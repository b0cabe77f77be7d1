use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use contraction_lab::cli::{run_command, Command, EXIT_USAGE};

#[derive(Parser)]
#[command(name = "contraction-lab", version, about = "Contraction semigroup experiments from a config file")]
struct Args {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the randomized theorem suites.
    Verify(Common),
    /// Simulate a PDE fixture and write `t,energy,norm_bound_ok`.
    Simulate(Common),
    /// Sweep the input/output map norm and write `T,norm_estimate,nsteps`.
    Ionorm(Common),
}

#[derive(clap::Args)]
struct Common {
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE as u8 } else { 0 });
        }
    };
    let (command, common) = match args.command {
        Cmd::Verify(c) => (Command::Verify, c),
        Cmd::Simulate(c) => (Command::Simulate, c),
        Cmd::Ionorm(c) => (Command::Ionorm, c),
    };
    ExitCode::from(run_command(command, &common.config, common.out.as_deref(), common.seed) as u8)
}
