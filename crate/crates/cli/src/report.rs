//! Report structure and file output.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::config::ExperimentConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Skipped,
    Inconclusive,
    Fail,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass | Status::Skipped => 0,
            Status::Fail => 1,
            Status::Inconclusive => 2,
        }
    }
}

/// Result of one check. A failure carries a witness, an inconclusive result
/// carries the budget that ran out.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    pub status: Status,
    pub summary: String,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub data: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget: Option<Value>,
}

impl Check {
    pub fn pass(suite: &'static str, name: impl Into<String>, summary: impl Into<String>) -> Self {
        Self {
            suite,
            name: name.into(),
            status: Status::Pass,
            summary: summary.into(),
            data: Value::Null,
            witness: None,
            budget: None,
        }
    }

    pub fn fail(
        suite: &'static str,
        name: impl Into<String>,
        summary: impl Into<String>,
        witness: Value,
    ) -> Self {
        Self {
            status: Status::Fail,
            witness: Some(witness),
            ..Self::pass(suite, name, summary)
        }
    }

    pub fn inconclusive(
        suite: &'static str,
        name: impl Into<String>,
        summary: impl Into<String>,
        budget: Value,
    ) -> Self {
        Self {
            status: Status::Inconclusive,
            budget: Some(budget),
            ..Self::pass(suite, name, summary)
        }
    }

    pub fn skipped(
        suite: &'static str,
        name: impl Into<String>,
        summary: impl Into<String>,
    ) -> Self {
        Self {
            status: Status::Skipped,
            ..Self::pass(suite, name, summary)
        }
    }

    /// `pass` when `ok`, otherwise `fail` with `witness`.
    pub fn verdict(
        suite: &'static str,
        name: impl Into<String>,
        ok: bool,
        summary: impl Into<String>,
        witness: Value,
    ) -> Self {
        if ok {
            Self::pass(suite, name, summary)
        } else {
            Self::fail(suite, name, summary, witness)
        }
    }

    pub fn with_data(mut self, data: impl Serialize) -> Self {
        self.data = serde_json::to_value(data).expect("report data serializes");
        self
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub suite: String,
    pub status: Status,
    pub config: ExperimentConfig,
    pub checks: Vec<Check>,
    /// Files written next to the report, relative to the output directory.
    pub artifacts: Vec<String>,
}

impl Report {
    pub fn new(suite: &str, config: ExperimentConfig) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            suite: suite.to_owned(),
            status: Status::Pass,
            config,
            checks: Vec::new(),
            artifacts: Vec::new(),
        }
    }

    /// Worst status over all checks; skipped checks do not count.
    pub fn finish(&mut self) {
        self.status = self
            .checks
            .iter()
            .map(|c| c.status)
            .filter(|s| *s != Status::Skipped)
            .max()
            .unwrap_or(Status::Pass);
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Timing {
    pub suite: &'static str,
    pub seconds: f64,
}

/// Output directory handle that records every file written.
pub struct OutDir {
    root: PathBuf,
    written: Vec<String>,
}

impl OutDir {
    pub fn create(root: &Path) -> io::Result<Self> {
        fs::create_dir_all(root)?;
        Ok(Self {
            root: root.to_owned(),
            written: Vec::new(),
        })
    }

    pub fn path(&self, rel: &str) -> PathBuf {
        self.root.join(rel)
    }

    pub fn write(&mut self, rel: &str, contents: impl AsRef<[u8]>) -> io::Result<PathBuf> {
        let path = self.path(rel);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        fs::write(&path, contents)?;
        self.written.push(rel.to_owned());
        Ok(path)
    }

    pub fn write_csv(
        &mut self,
        rel: &str,
        header: &[&str],
        rows: &[Vec<Cell>],
    ) -> io::Result<PathBuf> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)?;
        for row in rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        self.write(rel, bytes)
    }

    pub fn take_written(&mut self) -> Vec<String> {
        std::mem::take(&mut self.written)
    }
}

/// CSV cell; floats print with 17 significant digits.
pub enum Cell {
    F(f64),
    I(i64),
    U(u64),
    S(String),
}

impl Cell {
    pub fn render(&self) -> String {
        match self {
            Cell::F(x) => format_float(*x),
            Cell::I(x) => x.to_string(),
            Cell::U(x) => x.to_string(),
            Cell::S(s) => s.clone(),
        }
    }
}

pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

pub fn to_json(value: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_have_seventeen_significant_digits() {
        let s = format_float(0.1);
        let mantissa = s.split('e').next().unwrap();
        assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17);
        assert_eq!(s.parse::<f64>().unwrap(), 0.1);
        assert_eq!(format_float(-2.5e-7).parse::<f64>().unwrap(), -2.5e-7);
    }

    #[test]
    fn report_status_is_worst_check() {
        let mut r = Report::new("x", ExperimentConfig::default());
        r.finish();
        assert_eq!(r.status, Status::Pass);
        r.checks.push(Check::skipped("x", "a", ""));
        r.checks
            .push(Check::inconclusive("x", "b", "", Value::Null));
        r.finish();
        assert_eq!(r.status, Status::Inconclusive);
        r.checks.push(Check::fail("x", "c", "", Value::Null));
        r.finish();
        assert_eq!(r.status.exit_code(), 1);
    }
}
