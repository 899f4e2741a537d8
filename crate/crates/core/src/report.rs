//! Flat tabular reports: CSV with a header row, or `key=value` text lines.
//! Floats are printed with 17 significant digits so that reading a report
//! back reproduces every value.

use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::sl2::ScanRow;
use crate::spectral::GapReport;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ReportFormat {
    #[default]
    Csv,
    Text,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "text" => Ok(ReportFormat::Text),
            _ => Err(Error::Parse(format!("unknown format `{s}` (csv | text)"))),
        }
    }
}

impl fmt::Display for ReportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Text => "text",
        })
    }
}

/// A flat record type with a fixed column list.
pub trait Record: Serialize + DeserializeOwned {
    const KIND: &'static str;
    const COLUMNS: &'static [&'static str];
}

impl Record for GapReport {
    const KIND: &'static str = "gap";
    const COLUMNS: &'static [&'static str] = &["lambda", "alpha", "epsilon", "weight", "pass", "C", "Cprime"];
}

impl Record for ScanRow {
    const KIND: &'static str = "sl2-scan";
    const COLUMNS: &'static [&'static str] =
        &["N", "kind", "dim", "defect", "dist_upper_bound", "iterations", "wallclock_ms"];
}

pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) => match (n.as_u64(), n.as_i64()) {
            (Some(u), _) => u.to_string(),
            (_, Some(i)) => i.to_string(),
            _ => format_float(n.as_f64().unwrap_or(f64::NAN)),
        },
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Records of one kind, rendered to cells.
#[derive(Clone, Debug, PartialEq)]
pub struct RecordSet {
    kind: &'static str,
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl RecordSet {
    pub fn new<T: Record>() -> Self {
        RecordSet { kind: T::KIND, columns: T::COLUMNS.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn from_records<T: Record>(records: &[T]) -> Result<Self> {
        let mut set = Self::new::<T>();
        for r in records {
            set.push(r)?;
        }
        Ok(set)
    }

    pub fn kind(&self) -> &str {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Rejects records of a different kind than the set.
    pub fn push<T: Record>(&mut self, record: &T) -> Result<()> {
        if T::KIND != self.kind {
            return Err(Error::InvalidParameter(format!(
                "cannot mix `{}` records into a `{}` report",
                T::KIND,
                self.kind
            )));
        }
        let value = serde_json::to_value(record)?;
        let Value::Object(map) = value else {
            return Err(Error::InvalidParameter("records must serialize to flat objects".into()));
        };
        let keys: Vec<&String> = map.keys().collect();
        if keys.len() != self.columns.len() || keys.iter().zip(&self.columns).any(|(a, b)| *a != b) {
            return Err(Error::InvalidParameter(format!("record fields {keys:?} do not match the columns")));
        }
        self.rows.push(map.values().map(cell).collect());
        Ok(())
    }

    pub fn write_to<W: Write>(&self, format: ReportFormat, out: W) -> Result<()> {
        match format {
            ReportFormat::Csv => {
                let mut w = csv::Writer::from_writer(out);
                w.write_record(&self.columns).map_err(csv_err)?;
                for row in &self.rows {
                    w.write_record(row).map_err(csv_err)?;
                }
                w.flush()?;
            }
            ReportFormat::Text => {
                let mut out = out;
                for row in &self.rows {
                    let line: Vec<String> =
                        self.columns.iter().zip(row).map(|(c, v)| format!("{c}={v}")).collect();
                    writeln!(out, "{}", line.join(" "))?;
                }
            }
        }
        Ok(())
    }

    pub fn to_string(&self, format: ReportFormat) -> Result<String> {
        let mut buf = Vec::new();
        self.write_to(format, &mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Parse(e.to_string()))
    }
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Parse(format!("{other:?}")),
    }
}

/// Writes `records` to `path`, or to stdout when `path` is `None`.
pub fn write_report<T: Record>(records: &[T], format: ReportFormat, path: Option<&Path>) -> Result<()> {
    let set = RecordSet::from_records(records)?;
    match path {
        Some(p) => set.write_to(format, std::fs::File::create(p)?),
        None => set.write_to(format, std::io::stdout().lock()),
    }
}

/// Reads CSV records back, checking the header.
pub fn read_csv<T: Record, R: Read>(input: R) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(csv_err)?.clone();
    if header.iter().ne(T::COLUMNS.iter().copied()) {
        return Err(Error::Parse(format!("header {header:?} does not match `{}` columns", T::KIND)));
    }
    r.deserialize().map(|row| row.map_err(csv_err)).collect()
}
