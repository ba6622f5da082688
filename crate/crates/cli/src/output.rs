//! CSV formatting, file writing and run manifests.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{CliError, CliResult};

/// Version of every JSON document the tool writes.
pub const SCHEMA_VERSION: u32 = 1;

/// Scientific notation with 12 significant digits.
pub fn format_value(x: f64) -> String {
    format!("{x:.11e}")
}

/// Rounds `x` to the precision [`format_value`] writes, so computations can
/// use exactly the values a reader of the CSV sees.
pub fn round_sig(x: f64) -> f64 {
    if x.is_finite() {
        format_value(x).parse().expect("formatted float parses")
    } else {
        x
    }
}

/// Renders a CSV document: `#`-prefixed comment block, header, data rows.
pub fn render_csv(comment: &str, header: &[String], rows: &[Vec<f64>]) -> String {
    let mut out = String::new();
    for line in comment.lines() {
        if line.is_empty() {
            out.push_str("#\n");
        } else {
            out.push_str("# ");
            out.push_str(line);
            out.push('\n');
        }
    }
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|&x| format_value(x)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// A parsed CSV document.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvDocument {
    pub comment: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

pub fn parse_csv(text: &str, origin: &str) -> CliResult<CsvDocument> {
    let mut comment = String::new();
    let mut header = None;
    let mut rows = Vec::new();
    for (n, line) in text.lines().enumerate() {
        if let Some(rest) = line.strip_prefix('#') {
            comment.push_str(rest.strip_prefix(' ').unwrap_or(rest));
            comment.push('\n');
        } else if line.trim().is_empty() {
            continue;
        } else if header.is_none() {
            header = Some(line.split(',').map(|s| s.trim().to_string()).collect::<Vec<_>>());
        } else {
            let row = line
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| CliError::config(format!("{origin}:{}", n + 1), e.to_string()))?;
            rows.push(row);
        }
    }
    let header = header.ok_or_else(|| CliError::config(origin, "no header row"))?;
    if let Some(bad) = rows.iter().position(|r| r.len() != header.len()) {
        return Err(CliError::config(
            origin,
            format!("data row {bad} has the wrong number of cells"),
        ));
    }
    Ok(CsvDocument { comment, header, rows })
}

pub fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| CliError::output(parent, e))?;
        }
    }
    fs::write(path, contents).map_err(|e| CliError::output(path, e))
}

/// Record of one command invocation and everything it wrote.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub command: String,
    pub config_hash: String,
    pub tool_version: String,
    pub timestamp: String,
    pub outputs: Vec<PathBuf>,
    /// Axis ranges and other choices not fixed by the inputs.
    #[serde(skip_serializing_if = "serde_json::Value::is_null")]
    pub details: serde_json::Value,
}

impl RunManifest {
    pub fn new(command: impl Into<String>, config_hash: impl Into<String>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command: command.into(),
            config_hash: config_hash.into(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            outputs: Vec::new(),
            details: serde_json::Value::Null,
        }
    }

    /// Writes `contents` to `path` and lists it.
    pub fn write(&mut self, path: PathBuf, contents: &str) -> CliResult<()> {
        write_file(&path, contents)?;
        self.outputs.push(path);
        Ok(())
    }

    /// Writes the manifest itself, listing it among the outputs.
    pub fn finish(mut self, path: PathBuf) -> CliResult<Self> {
        self.outputs.push(path.clone());
        let json = serde_json::to_string_pretty(&self).expect("manifest serializes");
        write_file(&path, &(json + "\n"))?;
        Ok(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(format_value(2.0), "2.00000000000e0");
        assert_eq!(format_value(-1.0 / 3.0), "-3.33333333333e-1");
        assert_eq!(round_sig(1.0 / 3.0), 0.333333333333);
        assert!(round_sig(f64::NAN).is_nan());
    }

    #[test]
    fn csv_round_trip() {
        let header = vec!["x".to_string(), "F".to_string()];
        let rows = vec![vec![0.5, 0.9], vec![1.0, f64::NAN]];
        let text = render_csv("[figure]\nname = \"t\"\n", &header, &rows);
        assert!(text.starts_with("# [figure]\n"));
        assert!(!text.contains('\r'));
        let doc = parse_csv(&text, "t").unwrap();
        assert_eq!(doc.header, header);
        assert_eq!(doc.rows[0], rows[0]);
        assert!(doc.rows[1][1].is_nan());
        assert_eq!(doc.comment, "[figure]\nname = \"t\"\n");
    }

    #[test]
    fn ragged_rows_rejected() {
        assert!(parse_csv("a,b\n1,2\n3\n", "t").is_err());
        assert!(parse_csv("# only comments\n", "t").is_err());
    }
}
