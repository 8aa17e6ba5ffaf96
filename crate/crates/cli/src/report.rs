//! CSV tables and the JSON run summary. Floats are written with Rust's
//! shortest round-trip formatting, which is deterministic, so identical runs
//! produce byte-identical files.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::{json, Value};

use crate::config::SimulationConfig;
use crate::{CliError, Result};

pub fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.display().to_string(),
        source,
    })
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// A CSV table with a fixed header; rows are preformatted strings.
pub fn write_csv(path: &Path, header: &str, rows: &[String], footer: Option<&str>) -> Result<()> {
    let mut text = String::new();
    text.push_str(header);
    text.push('\n');
    for row in rows {
        text.push_str(row);
        text.push('\n');
    }
    if let Some(f) = footer {
        text.push_str(f);
        text.push('\n');
    }
    write_text(path, &text)
}

pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else {
        "nan".into()
    }
}

/// Run summary accumulated by the pipelines and flushed as summary.json.
pub struct Summary {
    command: String,
    config: Value,
    started: Instant,
    pub results: Value,
    dir: PathBuf,
}

impl Summary {
    pub fn new(command: &str, cfg: &SimulationConfig, dir: &Path) -> Self {
        Self {
            command: command.to_string(),
            config: serde_json::to_value(cfg).expect("config serializes"),
            started: Instant::now(),
            results: Value::Null,
            dir: dir.to_path_buf(),
        }
    }

    pub fn finish(self) -> Result<()> {
        let body = json!({
            "command": self.command,
            "config": self.config,
            "results": self.results,
            "wall_time": self.started.elapsed().as_secs_f64(),
        });
        let path = self.dir.join("summary.json");
        write_text(&path, &serde_json::to_string_pretty(&body).expect("valid json"))
    }
}
