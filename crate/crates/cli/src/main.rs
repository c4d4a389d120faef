use std::process::ExitCode;

use clap::Parser;
use qimage_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command.into_config().and_then(|cfg| run(&cfg)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qimage: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
