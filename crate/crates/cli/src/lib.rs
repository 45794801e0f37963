//! Library surface of the `sensus` CLI: file formats, manifests, the
//! elicitation client, figure export, and the subcommand drivers. The binary
//! is a thin wrapper around [`run_from_args`].

pub mod collect;
pub mod commands;
pub mod error;
pub mod figures;
pub mod formats;
pub mod manifest;

use clap::Parser;

/// Parses arguments and runs one command. Returns the process exit code:
/// 0 success, 1 validation failure, 2 runtime failure.
pub fn run_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let raw: Vec<String> = args
        .into_iter()
        .map(|a| a.into().to_string_lossy().into_owned())
        .collect();
    let cli = match commands::Cli::try_parse_from(raw.iter()) {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are successes; anything else is a
            // usage problem and exits as a validation failure.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match commands::run(cli, raw) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
