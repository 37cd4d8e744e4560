//! Report collection and emission in text or JSON Lines form.

use std::time::Duration;

use anyhow::{bail, Result};
use serde::Serialize;
use serde_json::{Map, Value};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Structured,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub inputs: Vec<String>,
    pub trunc: Option<usize>,
    pub cap: Option<usize>,
    pub samples: Option<usize>,
    pub seed: u64,
}

pub struct Report {
    records: Vec<Value>,
    lines: Vec<String>,
    passed: bool,
}

fn envelope(kind: &str, payload: Value) -> Result<Value> {
    let mut map = match payload {
        Value::Object(map) => map,
        other => {
            let mut map = Map::new();
            map.insert("value".into(), other);
            map
        }
    };
    if map.contains_key("record") || map.contains_key("schema_version") {
        bail!("payload for `{kind}` uses a reserved key");
    }
    map.insert("record".into(), Value::String(kind.into()));
    map.insert("schema_version".into(), SCHEMA_VERSION.into());
    Ok(Value::Object(map))
}

impl Report {
    pub fn new() -> Self {
        Self { records: Vec::new(), lines: Vec::new(), passed: true }
    }

    pub fn record<T: Serialize>(&mut self, kind: &str, payload: &T) -> Result<()> {
        self.records.push(envelope(kind, serde_json::to_value(payload)?)?);
        Ok(())
    }

    pub fn line(&mut self, text: impl Into<String>) {
        self.lines.push(text.into());
    }

    pub fn fail(&mut self) {
        self.passed = false;
    }

    pub fn require(&mut self, ok: bool) {
        if !ok {
            self.passed = false;
        }
    }

    pub fn passed(&self) -> bool {
        self.passed
    }

    /// Writes the report; timing only appears in text mode so structured
    /// output stays byte-identical across runs.
    pub fn emit(&self, format: Format, config: &RunConfig, elapsed: Duration) -> Result<String> {
        let status = if self.passed { "pass" } else { "fail" };
        let mut out = String::new();
        match format {
            Format::Text => {
                for line in &self.lines {
                    out.push_str(line);
                    out.push('\n');
                }
                out.push_str(&format!("{}: {} (seed {}, {:.2?})\n", config.command, status.to_uppercase(), config.seed, elapsed));
            }
            Format::Structured => {
                let mut all = vec![envelope("config", serde_json::to_value(config)?)?];
                all.extend(self.records.iter().cloned());
                all.push(envelope("summary", serde_json::json!({ "status": status, "seed": config.seed }))?);
                for v in all {
                    out.push_str(&serde_json::to_string(&v)?);
                    out.push('\n');
                }
            }
        }
        Ok(out)
    }
}
