use std::collections::BTreeMap;
use std::path::Path;

use kpgeo::acceptance::CriterionResult;
use serde::Serialize;

use crate::config::{Mode, RunConfig};
use crate::error::CliError;

pub const REPORT_SCHEMA: &str = "RPT v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Ok,
    Diverged,
    AcceptanceFailed,
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub schema: &'static str,
    pub mode: Mode,
    pub config: RunConfig,
    pub status: Status,
    /// Measured constants, keyed `name[resolution]` where a resolution applies.
    pub constants: BTreeMap<String, f64>,
    pub residuals: BTreeMap<String, f64>,
    /// Files written next to the report.
    pub artifacts: Vec<String>,
    pub acceptance: Vec<CriterionResult>,
    pub notes: Vec<String>,
}

impl RunReport {
    pub fn new(config: &RunConfig, mode: Mode) -> Self {
        Self {
            schema: REPORT_SCHEMA,
            mode,
            config: config.clone(),
            status: Status::Ok,
            constants: BTreeMap::new(),
            residuals: BTreeMap::new(),
            artifacts: Vec::new(),
            acceptance: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn constant(&mut self, key: impl Into<String>, v: f64) {
        self.constants.insert(key.into(), v);
    }

    pub fn residual(&mut self, key: impl Into<String>, v: f64) {
        self.residuals.insert(key.into(), v);
    }

    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(dir.join("report.json"), text)?;
        Ok(())
    }

    pub fn outcome(&self) -> Result<(), CliError> {
        match self.status {
            Status::Ok => Ok(()),
            Status::Diverged => Err(CliError::Divergence(self.notes.join("; "))),
            Status::AcceptanceFailed => {
                Err(CliError::Acceptance(self.acceptance.iter().filter(|r| !r.passed).count()))
            }
        }
    }
}
