use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::hex;
use crate::error::{CliError, Result};
use crate::formats::write_json;

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Serialize)]
pub struct ManifestEntry {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config_hash: String,
    pub seed: u64,
    pub files: Vec<ManifestEntry>,
}

fn collect(dir: &Path, root: &Path, out: &mut Vec<PathBuf>) -> std::io::Result<()> {
    let mut entries: Vec<_> = std::fs::read_dir(dir)?.collect::<std::io::Result<_>>()?;
    entries.sort_by_key(|e| e.file_name());
    for e in entries {
        let path = e.path();
        if e.file_type()?.is_dir() {
            collect(&path, root, out)?;
        } else if path != root.join(MANIFEST_NAME) {
            out.push(path);
        }
    }
    Ok(())
}

/// Writes `manifest.json` into `dir`, hashing every other file below it.
pub fn write_manifest(dir: &Path, command: &str, config_hash: &str, seed: u64) -> Result<Manifest> {
    let mut files = Vec::new();
    collect(dir, dir, &mut files).map_err(|e| CliError::io(format!("listing {}", dir.display()), e))?;
    let mut entries = Vec::with_capacity(files.len());
    for f in files {
        let bytes = std::fs::read(&f).map_err(|e| CliError::io(format!("reading {}", f.display()), e))?;
        let rel = f.strip_prefix(dir).unwrap_or(&f);
        entries.push(ManifestEntry {
            path: rel.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/"),
            bytes: bytes.len() as u64,
            sha256: hex(&Sha256::digest(&bytes)),
        });
    }
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command: command.to_string(),
        config_hash: config_hash.to_string(),
        seed,
        files: entries,
    };
    write_json(&dir.join(MANIFEST_NAME), &manifest)?;
    Ok(manifest)
}
