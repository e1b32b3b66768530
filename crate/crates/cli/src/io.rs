use std::fs;
use std::io::Write;

use serde::de::DeserializeOwned;

use crate::Failure;

/// Reads one point per row. A first row that does not parse as numbers is
/// taken as a header.
pub fn read_points(path: &str) -> Result<Vec<Vec<f64>>, Failure> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| Failure::Input(format!("cannot read {path}: {e}")))?;
    let mut points = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Failure::Input(format!("{path}: {e}")))?;
        let parsed: Result<Vec<f64>, _> = record.iter().map(|f| f.parse::<f64>()).collect();
        match parsed {
            Ok(p) => points.push(p),
            Err(_) if i == 0 => continue,
            Err(e) => return Err(Failure::Input(format!("{path}, row {}: {e}", i + 1))),
        }
    }
    if points.is_empty() {
        return Err(Failure::Input(format!("{path} holds no points")));
    }
    let n = points[0].len();
    if let Some(bad) = points.iter().position(|p| p.len() != n) {
        return Err(Failure::Input(format!("{path}: row {} has {} coordinates, expected {n}", bad + 1, points[bad].len())));
    }
    Ok(points)
}

pub fn read_json<T: DeserializeOwned>(path: &str) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Input(format!("cannot read {path}: {e}")))?;
    serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{path}: {e}")))
}

pub fn write_json(path: Option<&str>, value: &serde_json::Value) -> std::io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("JSON values serialize");
    text.push('\n');
    match path {
        Some(p) => fs::write(p, text),
        None => std::io::stdout().write_all(text.as_bytes()),
    }
}

/// `(t, v, φ)` rows with a header.
pub fn write_trace_csv(path: &str, rows: &[(f64, f64, f64)]) -> Result<(), Failure> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Failure::Input(format!("cannot write {path}: {e}")))?;
    let io_err = |e: csv::Error| Failure::Input(format!("cannot write {path}: {e}"));
    w.write_record(["t", "v", "phi"]).map_err(io_err)?;
    for (t, v, phi) in rows {
        w.write_record([t.to_string(), v.to_string(), phi.to_string()]).map_err(io_err)?;
    }
    w.flush().map_err(|e| Failure::Input(format!("cannot write {path}: {e}")))
}
