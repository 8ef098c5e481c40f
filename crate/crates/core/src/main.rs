use std::process::ExitCode;

use clap::Parser;
use glued_sphere::cli::{main_with, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    ExitCode::from(main_with(&cli))
}
