use std::process::ExitCode;

use clap::Parser;

use qcoin_cli::{execute, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    match execute(&cli, &mut stdout.lock()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("qcoin: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
