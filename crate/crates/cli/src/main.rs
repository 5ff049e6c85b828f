use std::process::ExitCode;

use ab_rsa_cli::{run, Cli};
use clap::Parser;

fn main() -> ExitCode {
    // clap exits with code 2 on malformed arguments.
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
