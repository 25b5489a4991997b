//! Rendering of result records as CSV or JSON lines, each carrying the
//! effective configuration and tool version.

use std::fs;
use std::str::FromStr;

use serde_json::{Map, Value};

use crate::config::RunConfig;
use crate::CliError;

pub type Record = Map<String, Value>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(CliError::Invalid(format!("unknown format `{s}`, expected csv or json"))),
        }
    }
}

/// Finite floats become JSON numbers; non-finite ones become `null`.
pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
}

fn config_object(cfg: &RunConfig) -> Value {
    let mut obj = Map::new();
    obj.insert("command".into(), Value::String(cfg.command.name().into()));
    for (k, v) in cfg.effective() {
        obj.insert(k.clone(), Value::String(v.clone()));
    }
    Value::Object(obj)
}

/// Comment lines that open every CSV artifact.
pub fn csv_preamble(cfg: &RunConfig) -> String {
    let mut s = format!("# arwave {}\n# command={}\n", arwave::VERSION, cfg.command.name());
    for (k, v) in cfg.effective() {
        s.push_str(&format!("# {k}={v}\n"));
    }
    s
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

pub fn render(cfg: &RunConfig, format: Format, records: &[Record]) -> String {
    match format {
        Format::Json => {
            let mut out = String::new();
            for r in records {
                let mut obj = Map::new();
                obj.insert("version".into(), Value::String(arwave::VERSION.into()));
                obj.insert("config".into(), config_object(cfg));
                obj.extend(r.clone());
                out.push_str(&Value::Object(obj).to_string());
                out.push('\n');
            }
            out
        }
        Format::Csv => {
            let mut out = csv_preamble(cfg);
            if let Some(first) = records.first() {
                out.push_str(&first.keys().cloned().collect::<Vec<_>>().join(","));
                out.push('\n');
            }
            for r in records {
                out.push_str(&r.values().map(csv_cell).collect::<Vec<_>>().join(","));
                out.push('\n');
            }
            out
        }
    }
}

/// Write to `--out` when set, otherwise to stdout.
pub fn emit(cfg: &RunConfig, text: &str) -> Result<(), CliError> {
    match cfg.get("out") {
        Some(path) => fs::write(path, text).map_err(|e| CliError::Failed(format!("cannot write `{path}`: {e}"))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
