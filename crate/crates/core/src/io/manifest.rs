use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::table::{write_file, ResultTable};
use crate::experiments::AuditSummary;
use crate::{Error, Result};

/// One written output file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputRef {
    pub path: String,
    pub rows: usize,
    pub sha256: String,
}

impl OutputRef {
    pub fn new(path: &Path, table: &ResultTable) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Ok(Self {
            path: path.display().to_string(),
            rows: table.len(),
            sha256: hex::encode(Sha256::digest(&bytes)),
        })
    }
}

/// Everything needed to reconstruct a run from its configuration. Timings
/// live here rather than in the result tables so that the tables are
/// reproducible byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub command: String,
    pub config_digest: Option<String>,
    pub base_seed: u64,
    pub threads: usize,
    pub schema_version: u32,
    /// seconds since the Unix epoch
    pub started_at: f64,
    pub finished_at: f64,
    pub wall_time_secs: f64,
    pub outputs: Vec<OutputRef>,
    pub audit: Option<AuditSummary>,
}

pub fn unix_now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

impl RunManifest {
    pub fn start(command: &str, config_digest: Option<String>, base_seed: u64, threads: usize) -> Self {
        let now = unix_now();
        Self {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config_digest,
            base_seed,
            threads,
            schema_version: super::table::SCHEMA_VERSION,
            started_at: now,
            finished_at: now,
            wall_time_secs: 0.0,
            outputs: Vec::new(),
            audit: None,
        }
    }

    pub fn finish(&mut self) {
        self.finished_at = unix_now();
        self.wall_time_secs = (self.finished_at - self.started_at).max(0.0);
    }

    /// Writes `dir/manifest.json`.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<PathBuf> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let path = dir.join("manifest.json");
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        write_file(&path, text.as_bytes())?;
        Ok(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::{Column, ColumnKind, Format};

    #[test]
    fn manifest_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut t = ResultTable::new(vec![Column::new("x", ColumnKind::Float)]);
        t.push(vec![0.5.into()]).unwrap();
        let p = t.write(dir.path(), "t", Format::Csv).unwrap();
        let mut m = RunManifest::start("spectrum", Some("ab".into()), 3, 2);
        m.outputs.push(OutputRef::new(&p, &t).unwrap());
        m.finish();
        assert!(m.wall_time_secs >= 0.0);
        let mp = m.write(dir.path()).unwrap();
        let back: RunManifest = serde_json::from_str(&std::fs::read_to_string(mp).unwrap()).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.outputs[0].rows, 1);
        assert_eq!(back.outputs[0].sha256.len(), 64);
    }
}
