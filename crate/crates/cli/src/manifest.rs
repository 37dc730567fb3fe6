//! Run manifest: what a run produced and from which configuration.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct RunManifest {
    pub config_hash: String,
    pub code_version: String,
    pub scenes: Vec<SceneEntry>,
    /// Wall-clock seconds per pipeline phase.
    pub timings_s: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SceneEntry {
    pub seed: u64,
    pub category: String,
    pub split: String,
    /// Paths relative to the run directory.
    pub files: Vec<String>,
}

impl RunManifest {
    pub fn new(config_hash: String) -> Self {
        RunManifest {
            config_hash,
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            scenes: Vec::new(),
            timings_s: BTreeMap::new(),
        }
    }

    pub fn manifest_path(run_dir: &Path) -> std::path::PathBuf {
        run_dir.join("manifest.json")
    }

    pub fn load(run_dir: &Path) -> CliResult<Self> {
        let path = Self::manifest_path(run_dir);
        let text = std::fs::read_to_string(&path)
            .map_err(|e| CliError::io(path.display().to_string(), e))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    /// Merges scene entries (replacing same seed+split) and timings, then
    /// writes the manifest back.
    pub fn upsert(
        run_dir: &Path,
        config_hash: &str,
        phase: &str,
        elapsed_s: f64,
        new_scenes: Vec<SceneEntry>,
    ) -> CliResult<Self> {
        let mut manifest = match Self::load(run_dir) {
            Ok(m) if m.config_hash == config_hash => m,
            _ => Self::new(config_hash.to_string()),
        };
        for entry in new_scenes {
            manifest
                .scenes
                .retain(|s| !(s.seed == entry.seed && s.split == entry.split));
            manifest.scenes.push(entry);
        }
        manifest
            .scenes
            .sort_by(|a, b| (&a.split, a.seed).cmp(&(&b.split, b.seed)));
        manifest.timings_s.insert(phase.to_string(), elapsed_s);
        manifest.save(run_dir)?;
        Ok(manifest)
    }

    pub fn save(&self, run_dir: &Path) -> CliResult<()> {
        std::fs::create_dir_all(run_dir)
            .map_err(|e| CliError::io(run_dir.display().to_string(), e))?;
        let path = Self::manifest_path(run_dir);
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| CliError::Config(format!("manifest serialization: {e}")))?;
        std::fs::write(&path, text).map_err(|e| CliError::io(path.display().to_string(), e))
    }

    /// Every referenced file must exist under the run directory.
    pub fn verify_files(&self, run_dir: &Path) -> CliResult<()> {
        for scene in &self.scenes {
            for f in &scene.files {
                let p = run_dir.join(f);
                if !p.exists() {
                    return Err(CliError::MissingInput(format!(
                        "manifest references missing file {}",
                        p.display()
                    )));
                }
            }
        }
        Ok(())
    }
}
