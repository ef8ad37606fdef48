use std::process::ExitCode;

use clap::Parser;
use lincfa_lab::validate::status_line;

mod args;
mod commands;
mod error;

use args::{Cli, Command};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Reduce(a) => commands::reduce(a),
        Command::Transform(a) => commands::transform(a),
        Command::Synth(a) => commands::synth(a),
        Command::Validate(a) => commands::validate(a),
        Command::Compare(a) => commands::compare(a),
    };
    match result {
        Ok(checks) => {
            for c in &checks {
                println!("[{}] {}: {}", if c.passed { "ok" } else { "FAIL" }, c.name, c.detail);
            }
            println!("{}", status_line(&checks));
            if checks.iter().all(|c| c.passed) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            println!("STATUS=fail CHECKS=0/0");
            ExitCode::from(e.exit_code())
        }
    }
}
