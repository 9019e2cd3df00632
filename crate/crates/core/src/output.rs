//! Tabular output: CSV with a header row and JSON documents tagged `"schema": 1`.
//!
//! Floating-point values are written as `{:.16e}` (17 significant digits), which
//! round-trips every `f64` and makes identical inputs produce identical bytes.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Version written into every JSON document.
pub const JSON_SCHEMA_VERSION: u32 = 1;

/// Output encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
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
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(Error::Config(format!(
                "unknown output format `{other}`; expected csv or json"
            ))),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Csv => "csv",
            Self::Json => "json",
        })
    }
}

/// A record with a fixed column order.
pub trait Row {
    /// Column names, in output order.
    fn columns() -> &'static [&'static str];
    /// Values in the same order as [`Row::columns`].
    fn values(&self) -> Vec<f64>;
}

/// Formats a float with 17 significant digits.
pub fn format_float(value: f64) -> String {
    format!("{value:.16e}")
}

/// Reads a float that JSON may carry as `null` (how NaN is written) back as NaN.
pub fn nullable_f64<'de, D: serde::Deserializer<'de>>(
    deserializer: D,
) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(deserializer)?.unwrap_or(f64::NAN))
}

/// JSON envelope around a table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsonDocument<R> {
    pub schema: u32,
    /// What the rows describe, e.g. `displacement-sweep`.
    pub kind: String,
    pub columns: Vec<String>,
    /// Inputs that produced the table.
    pub metadata: serde_json::Value,
    pub rows: Vec<R>,
}

impl<R: DeserializeOwned> JsonDocument<R> {
    /// Parses a document and checks its schema version.
    pub fn parse(text: &str) -> Result<Self> {
        let doc: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if doc.schema != JSON_SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema version {}; expected {JSON_SCHEMA_VERSION}",
                doc.schema
            )));
        }
        Ok(doc)
    }
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes rows as CSV with a header.
pub fn write_csv<R: Row, W: Write>(rows: &[R], writer: W) -> std::io::Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(R::columns())?;
    for row in rows {
        out.write_record(row.values().into_iter().map(format_float))?;
    }
    out.flush()
}

/// Writes rows as a pretty-printed JSON document.
pub fn write_json<R: Row + Serialize, W: Write>(
    kind: &str,
    metadata: serde_json::Value,
    rows: &[R],
    mut writer: W,
) -> std::io::Result<()> {
    let doc = JsonDocument {
        schema: JSON_SCHEMA_VERSION,
        kind: kind.to_string(),
        columns: R::columns().iter().map(|c| c.to_string()).collect(),
        metadata,
        rows: rows.iter().collect(),
    };
    serde_json::to_writer_pretty(&mut writer, &doc)?;
    writeln!(writer)
}

/// Writes a table to `path`, or to stdout when `path` is `None`.
pub fn write_table<R: Row + Serialize>(
    format: Format,
    kind: &str,
    metadata: serde_json::Value,
    rows: &[R],
    path: Option<&Path>,
) -> Result<()> {
    let stdout_path = Path::new("<stdout>");
    let emit = |w: &mut dyn Write| match format {
        Format::Csv => write_csv(rows, w),
        Format::Json => write_json(kind, metadata.clone(), rows, w),
    };
    match path {
        Some(p) => {
            let mut file = std::io::BufWriter::new(std::fs::File::create(p).map_err(io_error(p))?);
            emit(&mut file).map_err(io_error(p))?;
            file.flush().map_err(io_error(p))
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            emit(&mut lock).map_err(io_error(stdout_path))
        }
    }
}
