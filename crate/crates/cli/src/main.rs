use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = bcl::Cli::parse();
    match bcl::main_with(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
