use std::io::Write;
use std::path::Path;
use std::time::Instant;

use serde_json::{Map, Value};

use ridge_mml::Result;

pub const SCHEMA: &str = "ridge-mml/1";

/// JSON number, or the tokens "inf"/"-inf"; NaN becomes null.
pub fn num(v: f64) -> Value {
    if v.is_finite() {
        Value::from(v)
    } else if v.is_nan() {
        Value::Null
    } else if v > 0.0 {
        Value::from("inf")
    } else {
        Value::from("-inf")
    }
}

pub fn nums(values: &[f64]) -> Value {
    Value::Array(values.iter().copied().map(num).collect())
}

/// CSV cell for a number; missing and NaN values are left empty.
pub fn cell(v: Option<f64>) -> String {
    match v {
        Some(v) if v.is_finite() => v.to_string(),
        Some(v) if v == f64::INFINITY => "inf".into(),
        Some(v) if v == f64::NEG_INFINITY => "-inf".into(),
        _ => String::new(),
    }
}

/// Replaces any NaN or infinity that slipped into a serialized structure.
pub fn sanitize(value: Value) -> Value {
    match value {
        Value::Number(n) => match n.as_f64() {
            Some(v) if !v.is_finite() => num(v),
            _ => Value::Number(n),
        },
        Value::Array(items) => Value::Array(items.into_iter().map(sanitize).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, sanitize(v))).collect()),
        other => other,
    }
}

pub fn document(command: &str) -> Map<String, Value> {
    let mut doc = Map::new();
    doc.insert("schema".into(), SCHEMA.into());
    doc.insert("command".into(), command.into());
    doc
}

pub fn write_json(doc: Map<String, Value>, out: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(&sanitize(Value::Object(doc)))
        .map_err(|e| ridge_mml::Error::InvalidArgument(e.to_string()))?;
    write_bytes(format!("{text}\n").as_bytes(), out)
}

pub fn write_bytes(bytes: &[u8], out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, bytes)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()?;
        }
    }
    Ok(())
}

pub fn csv_bytes(header: &[&str], rows: &[Vec<String>]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.into_inner().map_err(|e| ridge_mml::Error::Io(e.into_error()))
}

/// Seconds elapsed since `start`, at the clock's full resolution.
pub fn seconds_since(start: Instant) -> f64 {
    start.elapsed().as_secs_f64()
}
