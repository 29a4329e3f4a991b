use std::process::ExitCode;

use clap::Parser;
use phototherm_cli::{execute, Cli, CliError, RunConfig};

fn configure_threads(cli: &Cli) -> Result<(), CliError> {
    let threads = match RunConfig::resolve(&cli.overrides) {
        Ok(cfg) => cfg.threads,
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().filter_or("PHOTOTHERM_LOG", "warn")).init();
    let cli = Cli::parse();
    let result = configure_threads(&cli).and_then(|()| execute(&cli));
    match result {
        Ok(summary) => {
            println!("{}", serde_json::to_string_pretty(&summary).unwrap_or_default());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", serde_json::to_string_pretty(&e.to_json()).unwrap_or_default());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
