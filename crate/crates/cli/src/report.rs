//! JSON and CSV output. The timestamp lives in a header block; the body is a
//! pure function of the resolved configuration.

use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use dwlab_core::harness::{config_digest, VerificationReport};
use serde::Serialize;
use serde_json::{json, Value};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub struct Outcome {
    pub body: Value,
    pub pass: bool,
    pub reports: Vec<VerificationReport>,
}

impl Outcome {
    /// `config` is digested and embedded next to `result`.
    pub fn new(command: &str, config: &impl Serialize, result: Value, pass: bool) -> Outcome {
        let body = json!({
            "command": command,
            "version": VERSION,
            "config_digest": config_digest(config),
            "config": config,
            "result": result,
            "pass": pass,
        });
        Outcome { body, pass, reports: Vec::new() }
    }

    pub fn with_reports(mut self, reports: Vec<VerificationReport>) -> Outcome {
        self.reports = reports;
        self
    }

    pub fn document(&self) -> Value {
        let ts = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        json!({
            "header": { "timestamp": ts, "version": VERSION },
            "body": self.body,
        })
    }
}

pub fn write_json(path: &Path, doc: &Value) -> std::io::Result<()> {
    let mut text = serde_json::to_string_pretty(doc).expect("json");
    text.push('\n');
    std::fs::write(path, text)
}

pub fn write_csv(path: &Path, reports: &[VerificationReport]) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["experiment", "sample_id", "param_json", "lhs", "rhs", "ratio"])?;
    for r in reports {
        for rec in r.csv_records() {
            w.write_record(&rec)?;
        }
    }
    w.flush()?;
    Ok(())
}
