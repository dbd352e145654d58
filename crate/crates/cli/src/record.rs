//! JSON-lines run journal.

use std::fs::OpenOptions;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use anyhow::{Context, Result};
use chrono::{SecondsFormat, Utc};
use eqcover::problem::ProblemSpec;
use eqcover::solver::ToleranceSet;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Validate,
    Count,
    Enumerate,
    Verify,
    Theta,
}

/// Inputs other than the problem and the seed.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<ToleranceSet>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dmax: Option<u64>,
}

/// One journal line. Re-running `command` on `spec`, `seed` and `params`
/// reproduces `result`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunRecord {
    pub timestamp: String,
    pub command: Command,
    pub spec: Option<ProblemSpec>,
    pub seed: Option<u64>,
    pub params: Params,
    pub result: serde_json::Value,
    pub exit_code: i32,
    pub version: String,
    /// Seconds.
    pub elapsed: f64,
}

impl RunRecord {
    pub fn new(command: Command, spec: Option<ProblemSpec>, seed: Option<u64>, params: Params) -> Self {
        RunRecord {
            timestamp: Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true),
            command,
            spec,
            seed,
            params,
            result: serde_json::Value::Null,
            exit_code: 0,
            version: env!("CARGO_PKG_VERSION").to_string(),
            elapsed: 0.0,
        }
    }
}

pub fn append(path: &Path, record: &RunRecord) -> Result<()> {
    let mut file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .with_context(|| format!("cannot open journal {}", path.display()))?;
    let line = serde_json::to_string(record)?;
    writeln!(file, "{line}").with_context(|| format!("cannot write journal {}", path.display()))?;
    Ok(())
}

pub fn read_all(path: &Path) -> Result<Vec<RunRecord>> {
    let file = std::fs::File::open(path).with_context(|| format!("cannot open journal {}", path.display()))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line).with_context(|| format!("journal line {} is not a run record", i + 1))?;
        out.push(rec);
    }
    Ok(out)
}
