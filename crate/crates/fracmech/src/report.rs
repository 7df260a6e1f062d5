//! Machine-readable outputs: JSON run reports and full-precision CSV.

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};

/// Version string reported in every run report.
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Structured result of one command invocation. Identical inputs always
/// produce identical reports.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Problem-file echo; re-parses to an identical model.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input_echo_toml: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pass: Option<bool>,
    pub results: Value,
}

impl RunReport {
    pub fn new(command: &str) -> RunReport {
        RunReport {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: TOOL_VERSION.to_string(),
            command: command.to_string(),
            input_echo_toml: None,
            pass: None,
            results: Value::Null,
        }
    }

    pub fn to_json(&self) -> String {
        let mut text =
            serde_json::to_string_pretty(self).expect("report serialization cannot fail");
        text.push('\n');
        text
    }
}

/// Render one value with 17 significant digits, enough to reproduce the
/// exact binary double on re-parse.
pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

/// Render columns as CSV: header row, then one row per index, full
/// precision, '.' decimal separator.
pub fn format_csv(headers: &[&str], columns: &[&[f64]]) -> Result<String> {
    if headers.len() != columns.len() {
        return Err(Error::Usage(format!(
            "{} headers for {} columns",
            headers.len(),
            columns.len()
        )));
    }
    let rows = columns.first().map_or(0, |c| c.len());
    for (h, c) in headers.iter().zip(columns) {
        if c.len() != rows {
            return Err(Error::Usage(format!(
                "column {h} has {} rows, expected {rows}",
                c.len()
            )));
        }
    }
    let mut out = headers.join(",");
    out.push('\n');
    for i in 0..rows {
        for (j, c) in columns.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&format_value(c[i]));
        }
        out.push('\n');
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn csv_round_trips_doubles_exactly() {
        let t = [0.0, 0.1, 1.0 / 3.0];
        let v = [1.0, -2.5e-17, std::f64::consts::PI];
        let text = format_csv(&["t", "value"], &[&t, &v]).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("t,value"));
        for (i, line) in lines.enumerate() {
            let cells: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
            assert_eq!(cells[0].to_bits(), t[i].to_bits());
            assert_eq!(cells[1].to_bits(), v[i].to_bits());
        }
    }

    #[test]
    fn csv_validates_shapes() {
        assert!(format_csv(&["a"], &[]).is_err());
        let short = [1.0];
        let long = [1.0, 2.0];
        assert!(format_csv(&["a", "b"], &[&short, &long]).is_err());
    }

    #[test]
    fn reports_carry_tool_identity_and_results() {
        let mut report = RunReport::new("solve");
        report.results = json!({"converged": true});
        let text = report.to_json();
        assert!(text.contains("\"command\": \"solve\""));
        assert!(text.contains("\"converged\": true"));
        let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed["tool"], "fracmech");
        assert_eq!(parsed["version"], TOOL_VERSION);
        assert!(parsed.get("pass").is_none());
    }
}
