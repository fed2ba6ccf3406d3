//! Result documents: rounding, JSON and CSV rendering, atomic writes.

use std::io::Write;
use std::path::Path;

use serde_json::{json, Map, Value};

use crate::config::RunConfig;
use crate::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Round to 12 significant digits; `-0.0` becomes `0.0`.
pub fn round12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { 0.0 } else { x };
    }
    format!("{x:.11e}").parse::<f64>().unwrap_or(x) + 0.0
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(num) if num.is_f64() => {
            if let Some(r) = num.as_f64().map(round12).and_then(serde_json::Number::from_f64) {
                *num = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

pub fn document(config: &RunConfig, result: Map<String, Value>) -> Result<String, CliError> {
    let config_value = serde_json::to_value(config).map_err(|e| CliError::io(e.to_string(), "config"))?;
    let mut doc = json!({
        "protocol": config.protocol.name(),
        "config": config_value,
        "result": Value::Object(result),
        "version": VERSION,
    });
    round_value(&mut doc);
    let mut text = serde_json::to_string_pretty(&doc).map_err(|e| CliError::io(e.to_string(), "document"))?;
    text.push('\n');
    Ok(text)
}

/// `k,probability` with twelve decimals.
pub fn distribution_csv(distribution: &[f64]) -> String {
    let mut out = String::from("k,probability\n");
    for (k, p) in distribution.iter().enumerate() {
        out.push_str(&format!("{k},{:.12}\n", p + 0.0));
    }
    out
}

/// Write through a temporary file in the target directory and rename it into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(e.to_string(), path.display()))?;
    tmp.write_all(contents.as_bytes()).map_err(|e| CliError::io(e.to_string(), path.display()))?;
    tmp.persist(path).map_err(|e| CliError::io(e.error.to_string(), path.display()))?;
    Ok(())
}
