use std::path::Path;
use std::time::Instant;

use dnls_ist::inverse::PointReport;
use serde::Serialize;
use serde_json::Value;

use crate::config::RunConfig;
use crate::CliError;

pub const REPORT_SCHEMA: &str = "dnls-ist.report/1";

/// Iteration and residual summary of a batch of Beals-Coifman solves.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct SolveStats {
    pub points: usize,
    pub total_iterations: usize,
    pub max_iterations: usize,
    pub max_residual: f64,
    pub dense_solves: usize,
}

impl SolveStats {
    pub fn add(&mut self, reports: &[PointReport]) {
        for r in reports {
            self.points += 1;
            self.total_iterations += r.iterations;
            self.max_iterations = self.max_iterations.max(r.iterations);
            self.max_residual = self.max_residual.max(r.residual);
            if r.method == dnls_ist::inverse::SolveMethod::Dense {
                self.dense_solves += 1;
            }
        }
    }
}

/// Machine-readable summary written next to the CSV outputs.
///
/// `wall_time_s` is the only field that differs between repeated runs.
#[derive(Debug, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub command: &'static str,
    pub version: &'static str,
    pub config: RunConfig,
    pub execution: &'static str,
    pub solves: Option<SolveStats>,
    pub results: Value,
    pub outputs: Vec<String>,
    pub wall_time_s: f64,
}

pub struct Recorder {
    command: &'static str,
    start: Instant,
    pub outputs: Vec<String>,
    pub solves: Option<SolveStats>,
}

impl Recorder {
    pub fn new(command: &'static str) -> Self {
        Self {
            command,
            start: Instant::now(),
            outputs: Vec::new(),
            solves: None,
        }
    }

    pub fn produced(&mut self, path: &Path) {
        let name = path.file_name().map(|s| s.to_string_lossy().into_owned());
        self.outputs.push(name.unwrap_or_default());
    }

    pub fn solves(&mut self, reports: &[PointReport]) {
        self.solves.get_or_insert_with(SolveStats::default).add(reports);
    }

    /// Write `<command>.report.json` into the output directory and return the report.
    pub fn finish(mut self, cfg: &RunConfig, results: Value) -> Result<Report, CliError> {
        let path = cfg.out(&format!("{}.report.json", self.command));
        self.produced(&path);
        let report = Report {
            schema: REPORT_SCHEMA,
            command: self.command,
            version: env!("CARGO_PKG_VERSION"),
            config: cfg.clone(),
            execution: if cfg!(feature = "parallel") { "parallel" } else { "sequential" },
            solves: self.solves,
            results,
            outputs: self.outputs,
            wall_time_s: self.start.elapsed().as_secs_f64(),
        };
        let text = serde_json::to_string_pretty(&report).map_err(|e| CliError::Io(e.to_string()))?;
        std::fs::write(&path, text + "\n").map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Ok(report)
    }
}
