use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    match dsfolio_cli::Cli::try_parse() {
        Ok(cli) => dsfolio_cli::main_with(cli),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                ExitCode::from(dsfolio_cli::EXIT_CONFIG)
            } else {
                ExitCode::SUCCESS
            }
        }
    }
}
