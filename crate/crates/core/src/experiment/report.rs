use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::experiment::config::ExperimentConfig;
use crate::pf::spectrum::SpectrumReport;
use crate::verdict::{Verdict, VerdictReport};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ResultBody {
    Spectrum { report: Box<SpectrumReport> },
    Verdict { report: VerdictReport },
    Error { message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultItem {
    pub key: String,
    #[serde(flatten)]
    pub body: ResultBody,
}

impl ResultItem {
    pub fn spectrum(key: impl Into<String>, report: SpectrumReport) -> Self {
        Self { key: key.into(), body: ResultBody::Spectrum { report: Box::new(report) } }
    }

    pub fn verdict(key: impl Into<String>, report: VerdictReport) -> Self {
        Self { key: key.into(), body: ResultBody::Verdict { report } }
    }

    pub fn error(key: impl Into<String>, message: impl Into<String>) -> Self {
        Self { key: key.into(), body: ResultBody::Error { message: message.into() } }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: ExperimentConfig,
    /// Sorted by key.
    pub results: Vec<ResultItem>,
    pub versions: BTreeMap<String, String>,
    /// SHA-256 of the inputs, hex encoded.
    pub input_hashes: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn versions() -> BTreeMap<String, String> {
    BTreeMap::from([
        ("ptmap".to_string(), env!("CARGO_PKG_VERSION").to_string()),
        ("schema".to_string(), SCHEMA_VERSION.to_string()),
    ])
}

/// Process exit status for a finished run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ExitStatus {
    /// Every verdict conclusive and as expected.
    Success = 0,
    /// Some verdict inconclusive or some item errored.
    Inconclusive = 2,
    /// A conclusive verdict contradicts the expectation.
    Unexpected = 3,
}

impl RunReport {
    pub fn verdicts(&self) -> impl Iterator<Item = (&str, &VerdictReport)> {
        self.results.iter().filter_map(|r| match &r.body {
            ResultBody::Verdict { report } => Some((r.key.as_str(), report)),
            _ => None,
        })
    }

    pub fn spectra(&self) -> impl Iterator<Item = (&str, &SpectrumReport)> {
        self.results.iter().filter_map(|r| match &r.body {
            ResultBody::Spectrum { report } => Some((r.key.as_str(), report.as_ref())),
            _ => None,
        })
    }

    pub fn item(&self, key: &str) -> Option<&ResultItem> {
        self.results.iter().find(|r| r.key == key)
    }

    pub fn exit_status(&self) -> ExitStatus {
        let mut status = ExitStatus::Success;
        for item in &self.results {
            let s = match &item.body {
                ResultBody::Error { .. } => ExitStatus::Inconclusive,
                ResultBody::Verdict { report } => match (report.verdict, self.config.expect) {
                    (Verdict::Inconclusive, _) => ExitStatus::Inconclusive,
                    (v, Some(want)) if v != want => ExitStatus::Unexpected,
                    _ => ExitStatus::Success,
                },
                ResultBody::Spectrum { .. } => ExitStatus::Success,
            };
            status = status.max(s);
        }
        status
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    CsvSpectra,
}

/// Write `report.json` or one `<key>.csv` per spectrum into `dir`.
pub fn emit_report(report: &RunReport, format: ReportFormat, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let mut files = Vec::new();
    let mut write = |name: String, contents: &str| -> Result<()> {
        let path = dir.join(name);
        fs::write(&path, contents).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        files.push(path);
        Ok(())
    };
    match format {
        ReportFormat::Json => write("report.json".into(), &report.to_json())?,
        ReportFormat::CsvSpectra => {
            for (key, spectrum) in report.spectra() {
                write(format!("{key}.csv"), &spectrum.to_csv())?;
            }
        }
    }
    Ok(files)
}

pub fn parse_report(text: &str) -> Result<RunReport> {
    Ok(serde_json::from_str(text)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportDiff {
    /// JSON paths whose values differ, with both values.
    pub changes: Vec<String>,
    /// Largest absolute difference between numbers at the same path.
    pub max_numeric_deviation: f64,
}

impl ReportDiff {
    pub fn identical(&self) -> bool {
        self.changes.is_empty()
    }
}

/// Structural comparison of two reports, ignoring timing.
pub fn diff_reports(a: &RunReport, b: &RunReport) -> ReportDiff {
    let strip = |r: &RunReport| {
        let mut v = serde_json::to_value(r).expect("reports serialize");
        if let Value::Object(m) = &mut v {
            m.remove("timing");
        }
        v
    };
    let mut diff = ReportDiff { changes: Vec::new(), max_numeric_deviation: 0.0 };
    walk("", &strip(a), &strip(b), &mut diff);
    diff
}

fn walk(path: &str, a: &Value, b: &Value, diff: &mut ReportDiff) {
    match (a, b) {
        (Value::Object(x), Value::Object(y)) => {
            let keys: std::collections::BTreeSet<&String> = x.keys().chain(y.keys()).collect();
            for k in keys {
                let p = format!("{path}/{k}");
                match (x.get(k), y.get(k)) {
                    (Some(u), Some(v)) => walk(&p, u, v, diff),
                    (u, v) => diff.changes.push(format!("{p}: {} -> {}", show(u), show(v))),
                }
            }
        }
        (Value::Array(x), Value::Array(y)) => {
            if x.len() != y.len() {
                diff.changes.push(format!("{path}: length {} -> {}", x.len(), y.len()));
            }
            for (i, (u, v)) in x.iter().zip(y).enumerate() {
                walk(&format!("{path}/{i}"), u, v, diff);
            }
        }
        (Value::Number(x), Value::Number(y)) => {
            if x != y {
                if let (Some(u), Some(v)) = (x.as_f64(), y.as_f64()) {
                    diff.max_numeric_deviation = diff.max_numeric_deviation.max((u - v).abs());
                }
                diff.changes.push(format!("{path}: {x} -> {y}"));
            }
        }
        _ => {
            if a != b {
                diff.changes.push(format!("{path}: {a} -> {b}"));
            }
        }
    }
}

fn show(v: Option<&Value>) -> String {
    v.map_or_else(|| "(absent)".to_string(), Value::to_string)
}
