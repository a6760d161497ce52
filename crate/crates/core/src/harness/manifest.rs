//! Run manifests: every parameter, stream id and output digest needed to
//! reproduce a run byte-for-byte.

use super::config::{parse, RunConfig};
use super::csvout::sha256_hex;
use crate::error::{Error, Result};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub const ARTIFACT_VERSION: &str = concat!("pamcat ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone)]
pub struct StageRecord {
    pub index: usize,
    pub kind: String,
    pub stream_base: u64,
    /// Normalized `key = value` parameters, sorted by key.
    pub params: Vec<(String, String)>,
}

#[derive(Debug, Clone)]
pub struct ArtifactRecord {
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Clone)]
pub struct RunManifest {
    pub version: String,
    pub master_seed: u64,
    pub created_unix: u64,
    pub stages: Vec<StageRecord>,
    pub artifacts: Vec<ArtifactRecord>,
}

impl RunManifest {
    pub fn new(master_seed: u64) -> Self {
        let created_unix = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Self {
            version: ARTIFACT_VERSION.to_string(),
            master_seed,
            created_unix,
            stages: Vec::new(),
            artifacts: Vec::new(),
        }
    }

    pub fn record_artifact(&mut self, file: &str, bytes: &[u8]) {
        self.artifacts.push(ArtifactRecord { file: file.to_string(), sha256: sha256_hex(bytes) });
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "[run]");
        let _ = writeln!(s, "version = {}", self.version);
        let _ = writeln!(s, "master_seed = {}", self.master_seed);
        let _ = writeln!(s, "created_unix = {}", self.created_unix);
        for st in &self.stages {
            let _ = writeln!(s, "\n[stage]");
            let _ = writeln!(s, "index = {}", st.index);
            let _ = writeln!(s, "kind = {}", st.kind);
            let _ = writeln!(s, "stream_base = {}", st.stream_base);
            for (k, v) in &st.params {
                let _ = writeln!(s, "{k} = {v}");
            }
        }
        for a in &self.artifacts {
            let _ = writeln!(s, "\n[artifact]");
            let _ = writeln!(s, "file = {}", a.file);
            let _ = writeln!(s, "sha256 = {}", a.sha256);
        }
        s
    }

    pub fn write_to(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.render())?;
        Ok(())
    }

    pub fn parse_file(path: &Path) -> Result<RunManifest> {
        let text = std::fs::read_to_string(path)?;
        let cfg: RunConfig = parse(&text)?;
        let mut manifest: Option<RunManifest> = None;
        let mut stages = Vec::new();
        let mut artifacts = Vec::new();
        for sec in &cfg.stages {
            match sec.name.as_str() {
                "run" => {
                    manifest = Some(RunManifest {
                        version: sec.get_str_or("version", "").to_string(),
                        master_seed: sec.get_usize_or("master_seed", 0)? as u64,
                        created_unix: sec.get_usize_or("created_unix", 0)? as u64,
                        stages: Vec::new(),
                        artifacts: Vec::new(),
                    });
                }
                "stage" => {
                    let mut params: Vec<(String, String)> = sec
                        .entries
                        .iter()
                        .filter(|(k, _)| !matches!(k.as_str(), "index" | "kind" | "stream_base"))
                        .map(|(k, v)| (k.clone(), v.clone()))
                        .collect();
                    params.sort();
                    stages.push(StageRecord {
                        index: sec.get_usize_or("index", stages.len())?,
                        kind: sec.require("kind")?.to_string(),
                        stream_base: sec.get_usize_or("stream_base", 0)? as u64,
                        params,
                    });
                }
                "artifact" => {
                    artifacts.push(ArtifactRecord {
                        file: sec.require("file")?.to_string(),
                        sha256: sec.require("sha256")?.to_string(),
                    });
                }
                other => {
                    return Err(Error::Schema {
                        stage: other.to_string(),
                        message: "unknown manifest section".into(),
                    })
                }
            }
        }
        let mut m = manifest.ok_or_else(|| Error::Schema {
            stage: "run".into(),
            message: "manifest is missing its [run] section".into(),
        })?;
        m.stages = stages;
        m.artifacts = artifacts;
        Ok(m)
    }

    /// Reconstruct the equivalent configuration text for re-execution.
    pub fn to_config_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "seed = {}", self.master_seed);
        for st in &self.stages {
            let _ = writeln!(s, "\n[{}]", st.kind);
            for (k, v) in &st.params {
                let _ = writeln!(s, "{k} = {v}");
            }
        }
        s
    }
}

/// Re-run a manifest into `out_dir` and verify that every artifact digest
/// matches. Returns the fresh manifest and the list of mismatched files.
pub fn replay_manifest(manifest_path: &Path, out_dir: &Path) -> Result<(RunManifest, Vec<String>)> {
    let original = RunManifest::parse_file(manifest_path)?;
    let config_text = original.to_config_text();
    let outcome = super::stages::run_config_text(&config_text, out_dir)?;
    let mut mismatches = Vec::new();
    for a in &original.artifacts {
        match outcome.manifest.artifacts.iter().find(|b| b.file == a.file) {
            Some(b) if b.sha256 == a.sha256 => {}
            Some(_) => mismatches.push(a.file.clone()),
            None => mismatches.push(format!("{} (missing)", a.file)),
        }
    }
    Ok((outcome.manifest, mismatches))
}

pub fn manifest_path(out_dir: &Path) -> PathBuf {
    out_dir.join("manifest.ini")
}
