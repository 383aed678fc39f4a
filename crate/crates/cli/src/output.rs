use std::fs;
use std::path::Path;
use std::time::Instant;

use dnls_core::io::to_json_string;
use serde::Serialize;
use serde_json::Value;

use crate::commands::CliError;

#[derive(Serialize)]
pub struct RunManifest<'a> {
    pub command: &'a str,
    pub config: &'a Value,
    pub outputs: &'a [String],
    pub wall_time: f64,
    pub tool_version: &'static str,
}

/// Collects the files written under one output prefix.
pub struct Artifacts {
    prefix: String,
    written: Vec<String>,
    started: Instant,
}

impl Artifacts {
    pub fn new(prefix: String) -> Result<Self, CliError> {
        if let Some(parent) = Path::new(&prefix).parent() {
            if !parent.as_os_str().is_empty() {
                fs::create_dir_all(parent)
                    .map_err(|e| CliError::op(format!("cannot create {}: {e}", parent.display())))?;
            }
        }
        Ok(Artifacts { prefix, written: Vec::new(), started: Instant::now() })
    }

    pub fn path(&self, suffix: &str) -> String {
        format!("{}{suffix}", self.prefix)
    }

    pub fn write(&mut self, suffix: &str, contents: &str) -> Result<String, CliError> {
        let path = self.path(suffix);
        fs::write(&path, contents).map_err(|e| CliError::op(format!("cannot write {path}: {e}")))?;
        self.written.push(path.clone());
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&mut self, suffix: &str, value: &T) -> Result<String, CliError> {
        let text = to_json_string(value).map_err(|e| CliError::op(e.to_string()))?;
        self.write(suffix, &text)
    }

    /// Records a file written by other means (e.g. streamed).
    pub fn record(&mut self, path: String) {
        self.written.push(path);
    }

    /// Writes `<prefix>.manifest.json` listing everything written so far.
    pub fn finish(self, command: &str, config: &Value) -> Result<(), CliError> {
        let manifest = RunManifest {
            command,
            config,
            outputs: &self.written,
            wall_time: self.started.elapsed().as_secs_f64(),
            tool_version: env!("CARGO_PKG_VERSION"),
        };
        let text = to_json_string(&manifest).map_err(|e| CliError::op(e.to_string()))?;
        let path = self.path(".manifest.json");
        fs::write(&path, text).map_err(|e| CliError::op(format!("cannot write {path}: {e}")))
    }
}
