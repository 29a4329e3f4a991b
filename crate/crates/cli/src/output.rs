//! File emission. Every CSV starts with `#` metadata lines (schema id,
//! code version, config echo, assumption flags) followed by an RFC-4180
//! table; every JSON document carries the same data under `"meta"`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{Format, RunConfig};
use crate::error::{write_error, CliResult};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Significant digits for every number written.
pub const DIGITS: usize = 12;

/// Pinned table layouts. The suffix is bumped whenever columns change.
pub mod schema {
    pub const TAXIS: (&str, &[&str]) = ("taxis/v1", &["g", "taxis", "dtaxis"]);
    pub const BASIC_STATE: (&str, &[&str]) = ("basic-state/v1", &["x3", "n_b", "g_b", "taxis_b", "temp_b"]);
    pub const DISPERSION: (&str, &[&str]) = (
        "dispersion/v1",
        &["a", "ra", "gamma_re", "gamma_im", "d_re", "d_im", "mantissa_re", "mantissa_im", "log_scale", "rcond"],
    );
    pub const NEUTRAL: (&str, &[&str]) = ("neutral/v1", &["a", "ra", "omega", "kind"]);
    pub const SWEEP: (&str, &[&str]) = ("sweep/v1", &["value", "a_c", "ra_c", "omega_c", "kind", "period", "error"]);
    pub const FIELD: (&str, &[&str]) = ("field/v1", &["x1", "x3", "value"]);
    pub const PHASE: (&str, &[&str]) = ("phase/v1", &["t", "temperature", "dtdt"]);

    pub const FIG_NEUTRAL: (&str, &[&str]) = ("fig-neutral/v1", &["rt", "branch", "kind", "a", "ra", "omega"]);
    pub const FIG_LEWIS: (&str, &[&str]) = ("fig-lewis/v1", &["rt", "le", "a_c", "ra_c", "omega_c", "kind"]);
    pub const FIG_PATTERNS: (&str, &[&str]) =
        ("fig-patterns/v1", &["le", "rt", "a_star", "x1", "x3", "psi", "n", "temperature"]);
    pub const FIG_BASIC: (&str, &[&str]) = ("fig-basic/v1", &["x3", "n", "intensity"]);
    pub const FIG_FRAMES: (&str, &[&str]) = ("fig-frames/v1", &["t", "x1", "x3", "psi", "n", "temperature"]);
    pub const FIG_SERIES: (&str, &[&str]) = ("fig-series/v1", &["t", "temperature", "dtdt"]);
    pub const FIG_FREQUENCY: (&str, &[&str]) = ("fig-frequency/v1", &["rt", "branch", "a", "ra", "omega"]);
    pub const FIG_PORTRAITS: (&str, &[&str]) =
        ("fig-portraits/v1", &["orbit", "a", "ra", "growth_re", "omega", "t", "temperature", "dtdt"]);
}

/// Number formatted with [`DIGITS`] significant digits.
pub fn num(v: f64) -> String {
    if v.is_finite() {
        let s = format!("{:.*e}", DIGITS - 1, v);
        // normalize "1.5e2" style exponents; keep the mantissa as written
        let (m, e) = s.split_once('e').expect("exponent");
        let e: i32 = e.parse().expect("integer exponent");
        if (-5..DIGITS as i32).contains(&e) {
            let decimals = (DIGITS as i32 - 1 - e).max(0) as usize;
            let fixed = format!("{:.*}", decimals, v);
            trim_zeros(&fixed)
        } else {
            format!("{}e{}", trim_zeros(m), e)
        }
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

/// Rounds every float in a JSON tree to [`DIGITS`] significant digits.
pub fn round_json(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap_or(f64::NAN);
            num(x).parse::<f64>().ok().and_then(serde_json::Number::from_f64).map_or(Value::Null, Value::Number)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round_json).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_json(v))).collect()),
        other => other,
    }
}

/// Provenance attached to every output file.
#[derive(Debug, Clone, Serialize)]
pub struct Meta {
    pub schema: String,
    pub version: &'static str,
    pub command: String,
    pub config: Value,
    pub assumptions: Vec<String>,
}

impl Meta {
    pub fn new(command: &str, schema: &str, cfg: &RunConfig) -> Self {
        Self {
            schema: format!("phototherm/{schema}"),
            version: VERSION,
            command: command.to_string(),
            config: serde_json::to_value(cfg).unwrap_or(Value::Null),
            assumptions: Vec::new(),
        }
    }

    pub fn with_assumption(mut self, note: impl Into<String>) -> Self {
        self.assumptions.push(note.into());
        self
    }

    pub fn with_extra(mut self, key: &str, value: Value) -> Self {
        if let Value::Object(map) = &mut self.config {
            map.insert(format!("@{key}"), value);
        }
        self
    }
}

/// Writes `# key: value` lines then the table.
pub fn write_csv(path: &Path, meta: &Meta, header: &[&str], rows: &[Vec<String>]) -> CliResult<()> {
    let file = File::create(path).map_err(write_error(path))?;
    let mut out = BufWriter::new(file);
    let config = serde_json::to_string(&round_json(meta.config.clone())).unwrap_or_default();
    let assumptions = serde_json::to_string(&meta.assumptions).unwrap_or_default();
    write!(
        out,
        "# schema: {}\n# version: {}\n# command: {}\n# config: {}\n# assumptions: {}\n",
        meta.schema, meta.version, meta.command, config, assumptions
    )
    .map_err(write_error(path))?;
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(out);
    w.write_record(header).map_err(|e| csv_error(path, e))?;
    for row in rows {
        w.write_record(row).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(write_error(path))?;
    Ok(())
}

fn csv_error(path: &Path, e: csv::Error) -> crate::error::CliError {
    write_error(path)(std::io::Error::other(e))
}

pub fn write_json(path: &Path, meta: &Meta, body: Value) -> CliResult<()> {
    let mut doc = json!({ "meta": meta });
    if let (Value::Object(d), Value::Object(b)) = (&mut doc, round_json(body)) {
        d.extend(b);
    }
    let text = serde_json::to_string_pretty(&doc).unwrap_or_default();
    std::fs::write(path, text + "\n").map_err(write_error(path))
}

/// Writes a table in the configured format; JSON tables are arrays of
/// row objects under `"rows"`.
pub fn write_table(
    dir: &Path,
    stem: &str,
    format: Format,
    meta: &Meta,
    header: &[&str],
    rows: &[Vec<String>],
) -> CliResult<PathBuf> {
    match format {
        Format::Csv => {
            let path = dir.join(format!("{stem}.csv"));
            write_csv(&path, meta, header, rows)?;
            Ok(path)
        }
        Format::Json => {
            let path = dir.join(format!("{stem}.json"));
            let objects: Vec<Value> = rows
                .iter()
                .map(|r| {
                    Value::Object(
                        header
                            .iter()
                            .zip(r)
                            .map(|(k, v)| {
                                let val = v.parse::<f64>().ok().and_then(serde_json::Number::from_f64).map_or_else(|| Value::String(v.clone()), Value::Number);
                                (k.to_string(), val)
                            })
                            .collect(),
                    )
                })
                .collect();
            write_json(&path, meta, json!({ "columns": header, "rows": objects }))?;
            Ok(path)
        }
    }
}

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(write_error(dir))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(num(79.78), "79.78");
        assert_eq!(num(std::f64::consts::PI), "3.14159265359");
        assert_eq!(num(-1234.5678901234567), "-1234.56789012");
        assert_eq!(num(1.0e-9), "1e-9");
        assert_eq!(num(2.5e15), "2.5e15");
        assert_eq!(num(0.0), "0");
        assert_eq!(num(f64::NAN), "nan");
    }

    #[test]
    fn json_numbers_are_rounded() {
        let v = round_json(json!({ "x": [1.0 / 3.0, 2] }));
        assert_eq!(v["x"][0].as_f64().unwrap(), 0.333333333333);
        assert_eq!(v["x"][1], 2);
    }
}
