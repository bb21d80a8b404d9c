//! Stage manifests: every artifact is reproducible from its manifest
//! (input hashes + config + derived seed + tool version). A stage whose
//! manifest still matches its inputs and whose outputs are intact is a
//! no-op on rerun.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::{CliError, Result};

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct StageManifest {
    pub schema_version: u32,
    pub tool_version: String,
    pub stage: String,
    /// Seed derived from the master seed and the stage name.
    pub seed: u64,
    pub config: RunConfig,
    /// Workdir-relative (or absolute external) input paths -> sha256.
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
}

impl PartialEq for RunConfig {
    fn eq(&self, other: &Self) -> bool {
        // Structural equality via the canonical JSON form.
        serde_json::to_string(self).ok() == serde_json::to_string(other).ok()
    }
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes =
        std::fs::read(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let digest = Sha256::digest(&bytes);
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

pub fn manifest_path(workdir: &Path, stage: &str) -> PathBuf {
    workdir.join(format!("{stage}.manifest.json"))
}

/// Hash a set of input files (all must exist).
pub fn hash_inputs(paths: &[PathBuf]) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for p in paths {
        map.insert(p.display().to_string(), sha256_file(p)?);
    }
    Ok(map)
}

/// True when the stored manifest matches the would-be manifest's inputs,
/// config, and seed, and every recorded output still hashes the same.
pub fn is_up_to_date(
    workdir: &Path,
    stage: &str,
    seed: u64,
    config: &RunConfig,
    inputs: &BTreeMap<String, String>,
) -> bool {
    let path = manifest_path(workdir, stage);
    let Ok(bytes) = std::fs::read(&path) else {
        return false;
    };
    let Ok(manifest) = serde_json::from_slice::<StageManifest>(&bytes) else {
        return false;
    };
    if manifest.schema_version != MANIFEST_SCHEMA_VERSION
        || manifest.seed != seed
        || &manifest.config != config
        || &manifest.inputs != inputs
    {
        return false;
    }
    manifest.outputs.iter().all(|(rel, hash)| {
        let p = workdir.join(rel);
        matches!(sha256_file(&p), Ok(h) if &h == hash)
    })
}

pub fn write_manifest(
    workdir: &Path,
    stage: &str,
    seed: u64,
    config: &RunConfig,
    inputs: BTreeMap<String, String>,
    output_paths: &[PathBuf],
) -> Result<()> {
    let mut outputs = BTreeMap::new();
    for p in output_paths {
        let rel = p
            .strip_prefix(workdir)
            .unwrap_or(p)
            .display()
            .to_string();
        outputs.insert(rel, sha256_file(p)?);
    }
    let manifest = StageManifest {
        schema_version: MANIFEST_SCHEMA_VERSION,
        tool_version: TOOL_VERSION.to_string(),
        stage: stage.to_string(),
        seed,
        config: config.clone(),
        inputs,
        outputs,
    };
    let json = serde_json::to_string_pretty(&manifest)?;
    crate::stages::write_atomic(&manifest_path(workdir, stage), json.as_bytes())
}
