use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use rescheck_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        // help and version exit 0, usage errors exit 2
        Err(e) => e.exit(),
    };
    match run(&cli) {
        Ok(out) => {
            let _ = std::io::stdout().write_all(out.as_bytes());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("rescheck: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
