use std::io::Write;
use std::path::Path;

use clap::ValueEnum;
use serde::Serialize;
use serde_json::Value;

use super::{Command, RunConfig};
use crate::error::{Error, Result};
use crate::montecarlo::Check;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Json,
    Csv,
}

/// Machine-readable command output. Field order is fixed; nested objects
/// are emitted with sorted keys.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub command: Command,
    pub config: Value,
    pub results: Value,
    pub checks: Vec<Check>,
    pub seed: Option<u64>,
}

impl Report {
    pub fn new(cfg: &RunConfig, results: Value, checks: Vec<Check>) -> Self {
        Self {
            command: cfg.command,
            config: serde_json::to_value(cfg).expect("config serializes"),
            results,
            checks,
            seed: cfg.seed,
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// `kind,name,value,threshold,pass` rows: flattened results, then checks.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["kind", "name", "value", "threshold", "pass"])
            .expect("in-memory write");
        let mut flat = Vec::new();
        flatten("", &self.results, &mut flat);
        for (name, value) in flat {
            w.write_record(["result", &name, &value, "", ""])
                .expect("in-memory write");
        }
        for c in &self.checks {
            w.write_record([
                "check",
                &c.name,
                &c.value.to_string(),
                &c.threshold.to_string(),
                &c.pass.to_string(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Json => self.to_json(),
            OutputFormat::Csv => self.to_csv(),
        }
    }

    /// Writes to `path`, or stdout when `None`.
    pub fn emit(&self, format: OutputFormat, path: Option<&Path>) -> Result<()> {
        let text = self.render(format);
        match path {
            Some(p) => std::fs::write(p, text)
                .map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(text.as_bytes())?;
                Ok(())
            }
        }
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let join = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match v {
        Value::Object(map) => {
            for (k, v) in map {
                flatten(&join(k), v, out);
            }
        }
        Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                flatten(&join(&i.to_string()), v, out);
            }
        }
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn flattening() {
        let mut out = Vec::new();
        flatten("", &json!({"a": {"b": [1, 2]}, "c": "x"}), &mut out);
        assert_eq!(
            out,
            vec![
                ("a.b.0".to_string(), "1".to_string()),
                ("a.b.1".to_string(), "2".to_string()),
                ("c".to_string(), "x".to_string())
            ]
        );
    }
}
