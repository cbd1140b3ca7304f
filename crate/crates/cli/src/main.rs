use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = opf_cli::Cli::parse();
    match opf_cli::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(opf_cli::exit_code(&e) as u8)
        }
    }
}
