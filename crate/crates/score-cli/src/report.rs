//! The JSON run report every subcommand emits.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::CliError;

/// What a run did and what it produced. Serialized to `report.json` in the
/// output directory and echoed on stdout.
///
/// `metrics` is an ordered map so identical runs serialize identically;
/// `wall_time_ms` is the one field allowed to differ between reruns.
#[derive(Debug, serde::Serialize)]
pub struct RunReport {
    pub command: String,
    pub config: serde_json::Value,
    pub seed: u64,
    pub metrics: BTreeMap<String, f64>,
    pub artifacts: Vec<String>,
    pub wall_time_ms: u64,
}

/// Accumulates a report while a subcommand runs.
pub struct Reporter {
    command: String,
    config: serde_json::Value,
    seed: u64,
    out_dir: PathBuf,
    metrics: BTreeMap<String, f64>,
    artifacts: Vec<String>,
    started: Instant,
}

impl Reporter {
    /// `config` is the parsed argument struct, echoed verbatim into the
    /// report so a run can be reproduced from its own output.
    pub fn new<C: serde::Serialize>(
        command: &str,
        config: &C,
        seed: u64,
        out_dir: &Path,
    ) -> Result<Self, CliError> {
        std::fs::create_dir_all(out_dir).map_err(|e| {
            CliError::Runtime(format!(
                "cannot create output directory {}: {e}",
                out_dir.display()
            ))
        })?;
        let config = serde_json::to_value(config)
            .map_err(|e| CliError::Runtime(format!("cannot encode config: {e}")))?;
        Ok(Reporter {
            command: command.to_string(),
            config,
            seed,
            out_dir: out_dir.to_path_buf(),
            metrics: BTreeMap::new(),
            artifacts: Vec::new(),
            started: Instant::now(),
        })
    }

    pub fn metric(&mut self, name: &str, value: f64) {
        self.metrics.insert(name.to_string(), value);
    }

    /// Write an artifact file into the output directory and record its path.
    pub fn artifact(&mut self, name: &str, contents: &str) -> Result<PathBuf, CliError> {
        let path = self.out_dir.join(name);
        std::fs::write(&path, contents)
            .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?;
        self.artifacts.push(path.display().to_string());
        Ok(path)
    }

    /// Write `report.json` and print the report to stdout.
    pub fn finish(self) -> Result<(), CliError> {
        let mut report = RunReport {
            command: self.command,
            config: self.config,
            seed: self.seed,
            metrics: self.metrics,
            artifacts: self.artifacts,
            wall_time_ms: self.started.elapsed().as_millis() as u64,
        };
        let path = self.out_dir.join("report.json");
        report.artifacts.push(path.display().to_string());
        let body = serde_json::to_string_pretty(&report)
            .map_err(|e| CliError::Runtime(format!("cannot encode report: {e}")))?;
        std::fs::write(&path, format!("{body}\n"))
            .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?;
        crate::print_stdout(&format!("{body}\n"));
        Ok(())
    }
}
