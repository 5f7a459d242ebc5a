use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use tagrpo::cli::{self, Cli};

fn main() -> ExitCode {
    let parsed = Cli::parse();
    let result = cli::init_threads().and_then(|()| cli::run(parsed));
    match result {
        Ok((out, ok)) => {
            let _ = std::io::stdout().write_all(out.as_bytes());
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
