//! Report emission: JSON for structured output, CSV for grids.
//!
//! Complex numbers are `[re, im]` pairs and matrices are row-major arrays of
//! pairs. JSON numbers use the shortest representation that round-trips.

use std::path::{Path, PathBuf};

use num_complex::Complex;
use serde_json::{json, Value};
use transop::{CMat, MatTrigPoly64};

use crate::error::CliError;

pub fn pair(z: Complex<f64>) -> [f64; 2] {
    [z.re, z.im]
}

pub fn matrix_pairs(m: &CMat<f64>) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| pair(m[(r, c)])).collect())
        .collect()
}

pub fn matrix(m: &CMat<f64>) -> Value {
    json!(matrix_pairs(m))
}

pub fn complexes(zs: &[Complex<f64>]) -> Value {
    json!(zs.iter().map(|&z| pair(z)).collect::<Vec<_>>())
}

pub fn poly(p: &MatTrigPoly64) -> Value {
    json!(crate::filefmt::coeffs_of(p))
}

/// Non-finite floats become `null`.
pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

/// Indented JSON in which arrays without objects stay on one line.
pub fn to_pretty(value: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, value, 0);
    out.push('\n');
    out
}

fn has_object(v: &Value) -> bool {
    match v {
        Value::Object(_) => true,
        Value::Array(xs) => xs.iter().any(has_object),
        _ => false,
    }
}

fn write_value(out: &mut String, v: &Value, depth: usize) {
    let pad = |n: usize| "  ".repeat(n);
    match v {
        Value::Object(map) if !map.is_empty() => {
            out.push_str("{\n");
            for (i, (k, x)) in map.iter().enumerate() {
                out.push_str(&pad(depth + 1));
                out.push_str(&serde_json::to_string(k).expect("string"));
                out.push_str(": ");
                write_value(out, x, depth + 1);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(depth));
            out.push('}');
        }
        Value::Array(xs) if has_object(v) => {
            out.push_str("[\n");
            for (i, x) in xs.iter().enumerate() {
                out.push_str(&pad(depth + 1));
                write_value(out, x, depth + 1);
                out.push_str(if i + 1 < xs.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(depth));
            out.push(']');
        }
        _ => out.push_str(&serde_json::to_string(v).expect("serializable")),
    }
}

/// Writes reports into one output directory.
pub struct OutDir {
    root: PathBuf,
    written: Vec<PathBuf>,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(root)
            .map_err(|e| CliError::Io(format!("{}: {e}", root.display())))?;
        Ok(OutDir {
            root: root.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<PathBuf, CliError> {
        let path = self.root.join(name);
        std::fs::write(&path, contents)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        self.written.push(path.clone());
        Ok(path)
    }

    pub fn write_json(&mut self, name: &str, value: &Value) -> Result<PathBuf, CliError> {
        self.write(name, &to_pretty(value))
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }
}
