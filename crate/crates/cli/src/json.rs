//! Report encoding: fixed-precision floats, residue keys and atomic writes.

use std::io::Write;
use std::path::Path;

use riesz_spectrum::family::{Functional, Part, Sign};
use riesz_spectrum::group::{DualElement, GroupSpec};
use serde_json::{json, Value};

use crate::error::{CliError, Result};

pub const SCHEMA: &str = "riesz-spectrum/1";

/// Significant digits kept for every float in a report.
pub const DIGITS: usize = 12;

/// Rounds `v` to [`DIGITS`] significant digits so that the shortest
/// round-trip rendering is stable across runs.
pub fn round(v: f64) -> f64 {
    if !v.is_finite() || v == 0.0 {
        return v;
    }
    format!("{:.*e}", DIGITS - 1, v).parse().unwrap_or(v)
}

/// Applies [`round`] to every float in `value`.
pub fn round_all(value: Value) -> Value {
    match value {
        Value::Number(n) if n.is_f64() => {
            let v = round(n.as_f64().unwrap_or(f64::NAN));
            serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(round_all).collect()),
        Value::Object(map) => {
            Value::Object(map.into_iter().map(|(k, v)| (k, round_all(v))).collect())
        }
        other => other,
    }
}

pub fn render(value: &Value) -> String {
    let mut text =
        serde_json::to_string_pretty(&round_all(value.clone())).expect("value serializes");
    text.push('\n');
    text
}

/// Writes through a temporary file in the target directory, then renames it
/// into place, so a failed run never leaves a partial file.
pub fn write_atomic(path: &Path, text: &str) -> Result<()> {
    let err = |source| CliError::Write {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(err)?;
    tmp.write_all(text.as_bytes()).map_err(err)?;
    tmp.as_file().sync_all().map_err(err)?;
    tmp.persist(path).map_err(|e| err(e.error))?;
    Ok(())
}

pub fn residues(group: &GroupSpec, gamma: DualElement) -> Value {
    json!(group.dual_residues(gamma))
}

pub fn residue_list(group: &GroupSpec, set: &[DualElement]) -> Value {
    Value::Array(set.iter().map(|&g| residues(group, g)).collect())
}

/// `"r1,r2,..."`, the key used for certificate assignments.
pub fn residue_key(group: &GroupSpec, gamma: DualElement) -> String {
    let parts: Vec<String> = group
        .dual_residues(gamma)
        .iter()
        .map(u64::to_string)
        .collect();
    parts.join(",")
}

pub fn functional(group: &GroupSpec, phi: &Functional) -> Value {
    json!({
        "gamma": group.dual_residues(phi.gamma),
        "part": match phi.part {
            Part::Re => "re",
            Part::Im => "im",
        },
        "sign": phi.sign.as_i8(),
    })
}

/// Inverse of [`functional`].
pub fn parse_functional(group: &GroupSpec, value: &Value) -> Result<Functional> {
    let bad = || CliError::Input(format!("malformed functional {value}"));
    let gamma = dual_from_value(group, value.get("gamma").ok_or_else(bad)?)?;
    let base = match value.get("part").and_then(Value::as_str) {
        Some("re") => Functional::re(gamma),
        Some("im") => Functional::im(gamma),
        _ => return Err(bad()),
    };
    match value.get("sign").and_then(Value::as_i64) {
        Some(1) => Ok(base.with_sign(Sign::Plus)),
        Some(-1) => Ok(base.with_sign(Sign::Minus)),
        _ => Err(bad()),
    }
}

pub fn dual_from_value(group: &GroupSpec, value: &Value) -> Result<DualElement> {
    let residues = residues_from_value(value)?;
    Ok(group.dual_element(&residues)?)
}

pub fn residues_from_value(value: &Value) -> Result<Vec<u64>> {
    value
        .as_array()
        .and_then(|items| {
            items
                .iter()
                .map(Value::as_u64)
                .collect::<Option<Vec<u64>>>()
        })
        .ok_or_else(|| CliError::Input(format!("expected a residue array, got {value}")))
}

pub fn parse_key(key: &str) -> Result<Vec<u64>> {
    key.split(',')
        .map(|r| r.trim().parse::<u64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| CliError::Input(format!("malformed residue key `{key}`")))
}
