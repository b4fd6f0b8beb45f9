//! `efc`: command-line front end for exact verification, rate tables, sampling
//! and simulation of the Poisson-Dirichlet fragmentation-coalescence process.

mod commands;
mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use crate::config::RunConfig;

/// Directory used for artifacts when `--output` is not given.
pub const OUTPUT_DIR_ENV: &str = "EFC_OUTPUT_DIR";

fn main() -> ExitCode {
    let config = match RunConfig::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let usage_error = e.use_stderr();
            let _ = e.print();
            return if usage_error { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(&config) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(config: &RunConfig) -> anyhow::Result<ExitCode> {
    let artifact = commands::dispatch(&config.command)?;
    match destination(config) {
        Some(path) => {
            if let Some(parent) = path.parent() {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(&path, &artifact.content)?;
            eprintln!("wrote {}", path.display());
        }
        None => std::io::stdout().write_all(artifact.content.as_bytes())?,
    }
    Ok(if artifact.verification_failed { ExitCode::from(2) } else { ExitCode::SUCCESS })
}

fn destination(config: &RunConfig) -> Option<PathBuf> {
    if let Some(p) = &config.output {
        return Some(p.clone());
    }
    let dir = std::env::var_os(OUTPUT_DIR_ENV)?;
    let (name, ext) = config.command.artifact_name();
    Some(PathBuf::from(dir).join(format!("{name}.{ext}")))
}
