//! Machine-readable reports.
//!
//! Keys are emitted in sorted order and numbers as strings: exact values as
//! `p/q`, floating values with 17 significant digits.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use dispersio::rat::{self, Rat};
use dispersio::solver::fmt17;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Info,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub residual: Option<String>,
    pub status: Status,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub artifacts: Vec<String>,
    pub checks: Vec<Check>,
    pub command: String,
    #[serde(rename = "inputs-hash")]
    pub inputs_hash: String,
}

pub fn exact(r: &Rat) -> String {
    rat::render(r)
}

pub fn float(v: f64) -> String {
    fmt17(v)
}

pub fn inputs_hash(command: &str, params: &str, potential: &str) -> String {
    let mut h = Sha256::new();
    for part in [command, params, potential] {
        h.update((part.len() as u64).to_le_bytes());
        h.update(part.as_bytes());
    }
    h.finalize().iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

impl Report {
    pub fn new(command: &str, inputs_hash: String) -> Self {
        Report { artifacts: Vec::new(), checks: Vec::new(), command: command.to_string(), inputs_hash }
    }

    fn push(&mut self, name: impl Into<String>, status: Status, residual: Option<String>) {
        self.checks.push(Check { name: name.into(), residual, status });
    }

    /// Pass/fail check with an optional residual.
    pub fn check(&mut self, name: impl Into<String>, ok: bool, residual: Option<String>) {
        self.push(name, if ok { Status::Pass } else { Status::Fail }, residual);
    }

    pub fn info(&mut self, name: impl Into<String>, value: Option<String>) {
        self.push(name, Status::Info, value);
    }

    pub fn failed(&self) -> bool {
        self.checks.iter().any(|c| c.status == Status::Fail)
    }

    pub fn to_json(&self) -> String {
        let mut r = self.clone();
        r.artifacts.sort();
        r.artifacts.dedup();
        let mut s = serde_json::to_string_pretty(&r).expect("report serializes");
        s.push('\n');
        s
    }

    /// Human summary, one line per check.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let tag = match c.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Info => "INFO",
            };
            let _ = match &c.residual {
                Some(r) => writeln!(out, "{tag} {} [{r}]", c.name),
                None => writeln!(out, "{tag} {}", c.name),
            };
        }
        let pass = self.checks.iter().filter(|c| c.status == Status::Pass).count();
        let fail = self.checks.iter().filter(|c| c.status == Status::Fail).count();
        let _ = writeln!(out, "{}: {pass} passed, {fail} failed", self.command);
        out
    }
}

/// Where the report and its artifacts go.
#[derive(Clone, Debug)]
pub struct Sink {
    pub report: PathBuf,
    pub dir: PathBuf,
}

impl Sink {
    pub fn new(out: Option<&Path>, command: &str) -> Self {
        let report = out.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from(format!("{command}.json")));
        let dir = report.parent().map(Path::to_path_buf).unwrap_or_default();
        Sink { report, dir }
    }

    /// Writes an artifact next to the report and records its file name.
    pub fn artifact(&self, report: &mut Report, name: &str, contents: &str) -> CliResult<()> {
        write_file(&self.dir.join(name), contents)?;
        report.artifacts.push(name.to_string());
        Ok(())
    }

    pub fn finish(&self, report: &Report) -> CliResult<()> {
        write_file(&self.report, &report.to_json())
    }
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io { path: dir.display().to_string(), msg: e.to_string() })?;
    }
    std::fs::write(path, contents).map_err(|e| CliError::Io { path: path.display().to_string(), msg: e.to_string() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keys_sorted_and_stable() {
        let mut r = Report::new("wdvv", inputs_hash("wdvv", "", "F"));
        r.check("a", true, Some(exact(&rat::rat(-1, 2))));
        r.info("b", None);
        r.artifacts = vec!["z.csv".into(), "a.json".into()];
        let s = r.to_json();
        let pos = |k: &str| s.find(k).unwrap();
        assert!(pos("\"artifacts\"") < pos("\"checks\""));
        assert!(pos("\"checks\"") < pos("\"command\""));
        assert!(pos("\"command\"") < pos("\"inputs-hash\""));
        assert!(pos("a.json") < pos("z.csv"));
        assert!(s.contains("\"-1/2\"") && s.contains("\"pass\"") && s.contains("\"info\""));
        assert_eq!(s, r.to_json());
        assert_ne!(inputs_hash("wdvv", "", "F"), inputs_hash("wdvv", "F", ""));
    }
}
