use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = toolclone_cli::Cli::parse();
    match toolclone_cli::execute(cli) {
        Ok(lines) => {
            for l in lines {
                println!("{l}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
