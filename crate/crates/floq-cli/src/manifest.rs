//! Run manifest: one JSON file per invocation recording what ran, with which
//! knobs, what it produced, and the headline numbers.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub argv: Vec<String>,
    pub started_unix: u64,
    pub elapsed_s: f64,
    /// Files written, relative to the output directory.
    pub outputs: Vec<String>,
    /// Headline scalars (fidelities, gaps, agreement counts, …).
    pub numbers: BTreeMap<String, f64>,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        RunManifest {
            command: command.to_string(),
            argv: std::env::args().collect(),
            started_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            elapsed_s: 0.0,
            outputs: Vec::new(),
            numbers: BTreeMap::new(),
        }
    }

    pub fn record(&mut self, key: &str, value: f64) {
        self.numbers.insert(key.to_string(), value);
    }

    pub fn output(&mut self, name: &str) {
        self.outputs.push(name.to_string());
    }
}

/// Write `bytes` to `path` atomically: stage into a sibling `.tmp`, rename
/// over the target. A crashed run leaves either the old file or none.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let tmp: PathBuf = path.with_extension(match path.extension() {
        Some(e) => format!("{}.tmp", e.to_string_lossy()),
        None => "tmp".to_string(),
    });
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)
}
