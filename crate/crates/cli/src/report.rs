//! Machine-readable run reports.

use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;

pub const SCHEMA: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub residual: f64,
    pub samples: usize,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, residual: f64, samples: usize) -> Self {
        let status = if passed { Status::Pass } else { Status::Fail };
        Check { name: name.into(), status, residual, samples }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

/// Tabular payload written instead of the check list under `--format csv`.
#[derive(Clone, Debug, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub schema: u32,
    pub command: String,
    pub seed: u64,
    pub checks: Vec<Check>,
    pub wall_clock_ms: u128,
    pub data: Value,
    #[serde(skip)]
    pub table: Option<Table>,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    fn csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        match &self.table {
            Some(t) => {
                w.write_record(&t.header)?;
                for row in &t.rows {
                    w.write_record(row)?;
                }
            }
            None => {
                w.write_record(["name", "status", "residual", "samples"])?;
                for c in &self.checks {
                    let status = if c.passed() { "pass" } else { "fail" };
                    w.write_record([c.name.clone(), status.into(), format!("{:e}", c.residual), c.samples.to_string()])?;
                }
            }
        }
        Ok(String::from_utf8(w.into_inner()?)?)
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Json => Ok(serde_json::to_string_pretty(self)? + "\n"),
            Format::Csv => self.csv(),
        }
    }

    pub fn emit(&self, format: Format, out: Option<&Path>) -> Result<()> {
        let text = self.render(format)?;
        match out {
            Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
            None => std::io::stdout().write_all(text.as_bytes())?,
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}
