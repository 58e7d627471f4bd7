use std::process::ExitCode;

use semcarto_cli::{parse_invocation, run, CliError};

fn main() -> ExitCode {
    let result = parse_invocation(std::env::args_os()).and_then(|config| run(&config));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Clap(e)) => e.exit(),
        Err(e) => {
            eprintln!("{}", e.one_line());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
