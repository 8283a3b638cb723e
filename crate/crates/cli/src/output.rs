//! Command results and where they are written.

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::config::OutputSection;
use crate::error::{CliError, CliResult};

/// Everything a subcommand produces.
#[derive(Debug, Default)]
pub struct CommandOutput {
    /// Human-readable report.
    pub summary: String,
    /// Machine-readable mirror of `summary`.
    pub json: serde_json::Value,
    pub csv: Option<String>,
    pub svg: Option<String>,
    /// Set when the command ran to completion but its checks failed.
    pub failure: Option<CliError>,
}

/// Output destinations; command-line flags take precedence over the config.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Destinations {
    pub csv: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    pub json: Option<PathBuf>,
}

impl Destinations {
    pub fn or_config(self, cfg: &OutputSection) -> Self {
        Destinations {
            csv: self.csv.or_else(|| cfg.csv.clone()),
            svg: self.svg.or_else(|| cfg.svg.clone()),
            json: self.json.or_else(|| cfg.json.clone()),
        }
    }
}

pub fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    std::fs::write(path, contents).map_err(|e| CliError::Resource(format!("writing {}: {e}", path.display())))
}

/// Writes artifacts to files. A CSV without a destination goes to `stdout`,
/// and the summary then moves to `stderr`.
pub fn emit(
    out: &CommandOutput,
    dest: &Destinations,
    stdout: &mut impl Write,
    stderr: &mut impl Write,
) -> CliResult<()> {
    let io = |e: std::io::Error| CliError::Resource(format!("writing output: {e}"));
    let mut csv_on_stdout = false;
    if let Some(csv) = &out.csv {
        match &dest.csv {
            Some(path) => write_file(path, csv)?,
            None => {
                stdout.write_all(csv.as_bytes()).map_err(io)?;
                csv_on_stdout = true;
            }
        }
    }
    match (&out.svg, &dest.svg) {
        (Some(svg), Some(path)) => write_file(path, svg)?,
        (None, Some(path)) => log::warn!("this command draws no chart; {} not written", path.display()),
        _ => {}
    }
    if let Some(path) = &dest.json {
        let text = serde_json::to_string_pretty(&out.json)
            .map_err(|e| CliError::Internal(format!("serializing summary: {e}")))?;
        write_file(path, &(text + "\n"))?;
    }
    if csv_on_stdout {
        stderr.write_all(out.summary.as_bytes()).map_err(io)?;
    } else {
        stdout.write_all(out.summary.as_bytes()).map_err(io)?;
    }
    Ok(())
}
