//! The `runlog` command-line tool: a thin client for the service API plus
//! local store administration.

pub mod client;
pub mod commands;
pub mod config;
pub mod render;
pub mod transport;

use std::io::Write;
use std::process::ExitCode;

pub use client::{ApiClient, ClientError, HttpTarget};
pub use commands::{execute, Cli, CliError, Context};
pub use config::{CliConfig, Output};
pub use transport::{ApiRequest, ApiResponse, HttpTransport, Payload, Recording, RecordingTransport, Transport};

/// Runs a parsed command against the real environment and HTTP.
pub fn run(cli: Cli) -> ExitCode {
    let env = |k: &str| std::env::var(k).ok();
    let config_file = config::config_path(&env)
        .and_then(|path| std::fs::read_to_string(&path).ok().map(|text| (path, text)));
    let mut connect = |url: &url::Url| -> Result<Box<dyn Transport>, CliError> {
        let transport = HttpTransport::new(url).map_err(|e| CliError::Failed(e.to_string()))?;
        Ok(Box::new(transport))
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let mut ctx = Context { env: &env, config_file, connect: &mut connect, out: &mut out };
    let result = execute(cli, &mut ctx);
    let _ = out.flush();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("runlog: {e}");
            if let Some(hint) = e.hint() {
                eprintln!("hint: {hint}");
            }
            ExitCode::from(e.exit_code())
        }
    }
}
