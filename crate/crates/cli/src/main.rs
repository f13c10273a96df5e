use std::io::{self, Write};
use std::process::ExitCode;

use clap::Parser;
use npc_cli::{execute, render_text, threads_from_env, Cli, CliError};
use npc_core::error::NpcError;

fn run(cli: &Cli) -> Result<bool, CliError> {
    #[cfg(feature = "parallel")]
    if let Some(n) = threads_from_env()? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("cannot start {n} workers: {e}")))?;
    }
    #[cfg(not(feature = "parallel"))]
    threads_from_env()?;

    let out = execute(&cli.command)?;
    let text = if cli.text {
        render_text(&out.value)
    } else {
        serde_json::to_string_pretty(&out.value).expect("values serialize") + "\n"
    };
    // A closed pipe (`npc ... | head`) is not an error worth reporting.
    match io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => {
            return Err(NpcError::Io { path: "<stdout>".into(), msg: e.to_string() }.into())
        }
        _ => {}
    }
    Ok(out.passed)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            let class = match &e {
                CliError::Core(inner) => inner.class(),
                CliError::Config(_) => "ConfigError",
                CliError::Usage(_) => "UsageError",
            };
            eprintln!("error[{class}]: {e}");
            ExitCode::from(2)
        }
    }
}
