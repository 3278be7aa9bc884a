//! Command-line front end: JSON file formats, build artifacts and the
//! subcommands of the `metfraisse` binary.

pub mod artifact;
pub mod cli;
pub mod commands;
pub mod error;
pub mod format;

use std::ffi::OsString;

use clap::Parser;

pub use cli::Cli;
pub use commands::{execute, Output};
pub use error::CliError;

/// What the process should print and return.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Parses `args` (program name first), runs the command and applies the
/// exit-code contract: 0 pass, 1 domain failure, 2 usage, 3 budget.
pub fn run<I, T>(args: I) -> Run
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let json = args.iter().any(|a| a == "--json");
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return match (code, json) {
                (0, _) => Run {
                    code,
                    stdout: text,
                    stderr: String::new(),
                },
                (_, true) => Run {
                    code,
                    stdout: CliError::Usage(text.trim().to_string()).to_json() + "\n",
                    stderr: String::new(),
                },
                _ => Run {
                    code,
                    stdout: String::new(),
                    stderr: text,
                },
            };
        }
    };
    match execute(&cli.command) {
        Ok(out) => {
            let code = if out.pass { 0 } else { 1 };
            match &cli.out {
                Some(path) => match std::fs::write(path, out.json + "\n") {
                    Ok(()) => Run {
                        code,
                        stdout: String::new(),
                        stderr: String::new(),
                    },
                    Err(e) => failure(CliError::Usage(format!("{}: {}", path.display(), e)), json),
                },
                None => Run {
                    code,
                    stdout: out.json + "\n",
                    stderr: String::new(),
                },
            }
        }
        Err(e) => failure(e, json),
    }
}

fn failure(e: CliError, json: bool) -> Run {
    let code = e.exit_code();
    if json {
        Run {
            code,
            stdout: e.to_json() + "\n",
            stderr: String::new(),
        }
    } else {
        Run {
            code,
            stdout: String::new(),
            stderr: format!("error: {}\n", e),
        }
    }
}
