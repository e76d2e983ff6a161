use serde_json::Value;

use super::record::ResultRecord;
use crate::error::{Error, Result};

/// Series names and their columns, in output order.
pub const SERIES: &[(&str, &[&str])] = &[
    ("fidelity", &["trial", "fidelity"]),
    ("depth-tradeoff", &["k", "qubits", "depth", "effective_t"]),
    ("convergence", &["samples", "abs_error"]),
    ("frame-potential", &["t", "value", "stderr", "haar"]),
    ("moment-distance", &["t", "distance"]),
    ("ranks", &["d", "rank", "unstable_points", "points"]),
    ("bounds", &["m", "n", "d", "thm1_bound", "l_value", "in_domain"]),
];

pub fn series_columns(name: &str) -> Result<&'static [&'static str]> {
    SERIES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, c)| *c)
        .ok_or_else(|| Error::UnknownSeries(name.into()))
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Tab-separated table with a header row; a record without the series
/// yields the header alone.
pub fn emit_plot_data(record: &ResultRecord, series: &str) -> Result<String> {
    let columns = series_columns(series)?;
    let mut out = columns.join("\t");
    out.push('\n');
    if let Some(s) = record.series.get(series) {
        for row in &s.rows {
            if row.len() != columns.len() {
                return Err(Error::DimensionMismatch(format!(
                    "series `{series}` row has {} cells for {} columns",
                    row.len(),
                    columns.len()
                )));
            }
            out.push_str(&row.iter().map(cell).collect::<Vec<_>>().join("\t"));
            out.push('\n');
        }
    }
    Ok(out)
}
