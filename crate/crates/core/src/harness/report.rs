//! Result rows, pass/fail checks and CSV/JSON output.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::config::ExperimentConfig;

/// One output record. Columns that do not apply stay empty.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub experiment: String,
    pub q: Option<u64>,
    #[serde(rename = "M1")]
    pub m1: Option<u64>,
    #[serde(rename = "M2")]
    pub m2: Option<u64>,
    #[serde(rename = "N")]
    pub n: Option<u64>,
    pub sigma: Option<f64>,
    pub t: Option<f64>,
    pub statistic: String,
    pub value: f64,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub seed: u64,
}

impl ResultRow {
    pub fn new(experiment: &str, statistic: &str, value: f64, seed: u64) -> Self {
        Self {
            experiment: experiment.to_owned(),
            q: None,
            m1: None,
            m2: None,
            n: None,
            sigma: None,
            t: None,
            statistic: statistic.to_owned(),
            value,
            ci_low: None,
            ci_high: None,
            seed,
        }
    }

    pub fn q(mut self, q: u64) -> Self {
        self.q = Some(q);
        self
    }

    pub fn m1(mut self, m: u64) -> Self {
        self.m1 = Some(m);
        self
    }

    pub fn m2(mut self, m: u64) -> Self {
        self.m2 = Some(m);
        self
    }

    pub fn n(mut self, n: u64) -> Self {
        self.n = Some(n);
        self
    }

    pub fn sigma(mut self, sigma: f64) -> Self {
        self.sigma = Some(sigma);
        self
    }

    pub fn t(mut self, t: f64) -> Self {
        self.t = Some(t);
        self
    }

    /// Interval `value ± half_width`.
    pub fn ci(mut self, half_width: f64) -> Self {
        self.ci_low = Some(self.value - half_width);
        self.ci_high = Some(self.value + half_width);
        self
    }
}

/// A named assertion evaluated by an experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}: {}", self.name, self.detail)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub rows: Vec<ResultRow>,
    pub checks: Vec<Check>,
}

impl ExperimentResult {
    pub fn new(config: ExperimentConfig) -> Self {
        Self {
            config,
            rows: Vec::new(),
            checks: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub(crate) fn push(&mut self, row: ResultRow) {
        self.rows.push(row);
    }

    pub(crate) fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check::new(name, passed, detail));
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::InvalidArgument(format!("unknown format `{other}`"))),
        }
    }
}

const COLUMNS: [&str; 12] = [
    "experiment", "q", "M1", "M2", "N", "sigma", "t", "statistic", "value", "ci_low", "ci_high", "seed",
];

/// CSV with a header row; an empty result gives the header alone.
pub fn write_csv<W: Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(COLUMNS)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

#[derive(Serialize)]
struct JsonReport<'a> {
    config: &'a ExperimentConfig,
    records: &'a [ResultRow],
}

#[derive(Deserialize)]
struct JsonRecords {
    records: Vec<ResultRow>,
}

/// JSON object `{"config": …, "records": [...]}`.
pub fn write_json<W: Write>(result: &ExperimentResult, mut out: W) -> Result<()> {
    let report = JsonReport {
        config: &result.config,
        records: &result.rows,
    };
    serde_json::to_writer_pretty(&mut out, &report)?;
    out.write_all(b"\n").map_err(|source| Error::Io {
        path: "<json writer>".into(),
        source,
    })?;
    Ok(())
}

/// Records of a JSON report written by [`write_json`].
pub fn read_json_records(text: &str) -> Result<Vec<ResultRow>> {
    Ok(serde_json::from_str::<JsonRecords>(text)?.records)
}

pub fn render(result: &ExperimentResult, format: Format) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    match format {
        Format::Csv => write_csv(&result.rows, &mut buf)?,
        Format::Json => write_json(result, &mut buf)?,
    }
    Ok(buf)
}

/// Writes the result to `path` in the given format.
pub fn emit(result: &ExperimentResult, format: Format, path: &Path) -> Result<()> {
    let bytes = render(result, format)?;
    std::fs::write(path, bytes).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
