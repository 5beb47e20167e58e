use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = kurepa::cli::Cli::parse();
    ExitCode::from(kurepa::cli::run(cli))
}
