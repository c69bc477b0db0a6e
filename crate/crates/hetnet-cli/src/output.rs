//! CSV emission with an embedded run manifest.
//!
//! Every output starts with `#`-prefixed manifest lines (command, tool
//! version, config hash, seeds, wall-clock duration, output target) and
//! continues with an RFC-4180 body. The body is byte-identical across
//! reruns with the same flags; only the duration comment varies.

use crate::CliError;
use std::io::Write;
use std::path::PathBuf;
use std::time::Duration;

/// Identifies one command invocation inside its output files.
pub struct RunManifest {
    pub command: &'static str,
    pub config_path: String,
    pub config_sha256: String,
    pub args: Vec<(String, String)>,
    pub seed: Option<u64>,
    pub duration: Duration,
    pub output: Option<PathBuf>,
}

impl RunManifest {
    fn header_lines(&self) -> Vec<String> {
        let mut lines = vec![
            format!("# command: {}", self.command),
            format!("# tool: hetnet {}", env!("CARGO_PKG_VERSION")),
            format!("# config: {} sha256={}", self.config_path, self.config_sha256),
        ];
        if !self.args.is_empty() {
            let rendered: Vec<String> = self
                .args
                .iter()
                .map(|(k, v)| format!("{k}={v}"))
                .collect();
            lines.push(format!("# args: {}", rendered.join(" ")));
        }
        if let Some(seed) = self.seed {
            lines.push(format!("# seed: {seed}"));
        }
        lines.push(format!("# duration_ms: {}", self.duration.as_millis()));
        lines.push(format!(
            "# outputs: {}",
            self.output
                .as_ref()
                .map_or_else(|| "-".to_string(), |p| p.display().to_string())
        ));
        lines
    }
}

/// A fully computed CSV: header row plus data rows, written only after the
/// command succeeded.
pub struct CsvDocument {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvDocument {
    pub fn new(columns: Vec<String>) -> Self {
        Self {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Writes manifest and body to the manifest's output target (stdout
    /// when none).
    pub fn write(&self, manifest: &RunManifest) -> Result<(), CliError> {
        let mut text = String::new();
        for line in manifest.header_lines() {
            text.push_str(&line);
            text.push('\n');
        }
        text.push_str(&self.columns.join(","));
        text.push('\n');
        for row in &self.rows {
            text.push_str(&row.join(","));
            text.push('\n');
        }
        match &manifest.output {
            Some(path) => std::fs::write(path, text)
                .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display()))),
            None => {
                let stdout = std::io::stdout();
                let mut lock = stdout.lock();
                lock.write_all(text.as_bytes())
                    .map_err(|e| CliError::Io(format!("stdout: {e}")))
            }
        }
    }
}

/// Shortest-round-trip float formatting; `nan` marks undefined entries.
pub fn fmt_f64(value: f64) -> String {
    if value.is_nan() {
        "nan".to_string()
    } else {
        format!("{value}")
    }
}
