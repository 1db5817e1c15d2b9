use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Record written next to every command's outputs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Full argument vector, enough to replay the run.
    pub argv: Vec<String>,
    pub config: Value,
    pub tool_version: String,
    pub inputs: Vec<String>,
    pub outputs: Vec<PathBuf>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    pub wall_time_s: f64,
}

pub struct ManifestBuilder {
    manifest: RunManifest,
    start: Instant,
}

impl ManifestBuilder {
    pub fn new(command: &str, config: Value) -> Self {
        Self {
            manifest: RunManifest {
                command: command.into(),
                argv: std::env::args().collect(),
                config,
                tool_version: env!("CARGO_PKG_VERSION").into(),
                inputs: Vec::new(),
                outputs: Vec::new(),
                notes: Vec::new(),
                wall_time_s: 0.0,
            },
            start: Instant::now(),
        }
    }

    pub fn input(&mut self, s: impl Into<String>) {
        self.manifest.inputs.push(s.into());
    }

    pub fn output(&mut self, p: impl Into<PathBuf>) {
        self.manifest.outputs.push(p.into());
    }

    pub fn note(&mut self, s: impl Into<String>) {
        let s = s.into();
        log::info!("{s}");
        self.manifest.notes.push(s);
    }

    pub fn warn(&mut self, s: impl Into<String>) {
        let s = s.into();
        log::warn!("{s}");
        self.manifest.notes.push(s);
    }

    /// Writes the manifest to `path`.
    pub fn finish(mut self, path: &Path) -> Result<RunManifest> {
        self.manifest.wall_time_s = self.start.elapsed().as_secs_f64();
        let text = serde_json::to_string_pretty(&self.manifest)? + "\n";
        std::fs::write(path, text).with_context(|| format!("writing manifest {}", path.display()))?;
        Ok(self.manifest)
    }
}

/// `<output>.manifest.json` for file outputs, `<dir>/manifest.json` for directories.
pub fn manifest_path(output: &Path, is_dir: bool) -> PathBuf {
    if is_dir {
        output.join("manifest.json")
    } else {
        let mut name = output.file_name().map(|n| n.to_os_string()).unwrap_or_default();
        name.push(".manifest.json");
        output.with_file_name(name)
    }
}
