use std::collections::BTreeMap;
use std::io::{self, Write};

use chrono::{SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: BTreeMap<String, String>,
    pub tool_version: String,
    /// UTC, ISO-8601.
    pub timestamp: String,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            parameters: BTreeMap::new(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: Utc::now().to_rfc3339_opts(SecondsFormat::Secs, true),
        }
    }

    pub fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.parameters.insert(key.to_string(), value.to_string());
        self
    }
}

#[derive(Serialize)]
struct JsonReport<'a, T: Serialize> {
    manifest: &'a RunManifest,
    results: &'a [T],
}

pub fn emit_json<T: Serialize>(manifest: &RunManifest, results: &[T]) -> io::Result<()> {
    let report = JsonReport { manifest, results };
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, &report)?;
    out.write_all(b"\n")
}

/// Writes rows joined by `,` with `\n` line endings.
pub struct Csv {
    out: io::StdoutLock<'static>,
}

impl Csv {
    pub fn new(header: &[&str]) -> io::Result<Self> {
        let mut csv = Self {
            out: io::stdout().lock(),
        };
        csv.row(header)?;
        Ok(csv)
    }

    pub fn row<S: AsRef<str>>(&mut self, fields: &[S]) -> io::Result<()> {
        let line = fields.iter().map(AsRef::as_ref).collect::<Vec<_>>().join(",");
        self.out.write_all(line.as_bytes())?;
        self.out.write_all(b"\n")
    }
}

/// Fixed four decimals, `.` separator, no grouping.
pub fn fixed4(x: f64) -> String {
    format!("{x:.4}")
}
