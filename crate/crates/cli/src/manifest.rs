//! Run manifests: a `<output>.manifest.json` sidecar next to every primary
//! output, recording how it was produced.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::ConfigSnapshot;

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
pub struct FileDigest {
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    schema_version: u32,
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    argv: &'a [String],
    config: &'a ConfigSnapshot,
    parameters: &'a serde_json::Value,
    seeds: &'a BTreeMap<String, u64>,
    threads: usize,
    parallel: bool,
    inputs: &'a [FileDigest],
    outputs: Vec<FileDigest>,
    elapsed_seconds: f64,
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(hex(&Sha256::digest(&bytes)))
}

/// Digest of a file, or of a directory as the sorted list of its files'
/// names and digests.
pub fn sha256_path(path: &Path) -> Result<String> {
    if !path.is_dir() {
        return sha256_file(path);
    }
    let mut names: Vec<PathBuf> =
        fs::read_dir(path)?.filter_map(|e| e.ok()).map(|e| e.path()).filter(|p| p.is_file()).collect();
    names.sort();
    let mut h = Sha256::new();
    for p in names {
        h.update(p.file_name().unwrap().to_string_lossy().as_bytes());
        h.update([0]);
        h.update(sha256_file(&p)?.as_bytes());
        h.update([b'\n']);
    }
    Ok(hex(&h.finalize()))
}

/// File name of the manifest written for `output`.
pub fn manifest_name(output: &Path) -> String {
    format!("{}.manifest.json", output.file_name().map(|n| n.to_string_lossy()).unwrap_or_default())
}

pub fn manifest_path(output: &Path) -> PathBuf {
    output.with_file_name(manifest_name(output))
}

pub struct Run {
    command: &'static str,
    argv: Vec<String>,
    config: ConfigSnapshot,
    parameters: serde_json::Value,
    seeds: BTreeMap<String, u64>,
    inputs: Vec<FileDigest>,
    started: Instant,
}

impl Run {
    pub fn new(
        command: &'static str,
        argv: &[String],
        config: &ConfigSnapshot,
        parameters: &impl Serialize,
    ) -> Result<Self> {
        Ok(Run {
            command,
            argv: argv.to_vec(),
            config: config.clone(),
            parameters: serde_json::to_value(parameters)?,
            seeds: BTreeMap::new(),
            inputs: Vec::new(),
            started: Instant::now(),
        })
    }

    pub fn seed(&mut self, name: &str, value: u64) {
        self.seeds.insert(name.to_string(), value);
    }

    pub fn input(&mut self, path: &Path) -> Result<()> {
        self.inputs.push(FileDigest { path: path.to_path_buf(), sha256: sha256_path(path)? });
        Ok(())
    }

    /// Writes the manifest next to `primary`; `outputs` lists every file
    /// the run wrote, `primary` included.
    pub fn finish(self, primary: &Path, outputs: &[&Path]) -> Result<PathBuf> {
        let outputs = outputs
            .iter()
            .map(|p| Ok(FileDigest { path: p.to_path_buf(), sha256: sha256_file(p)? }))
            .collect::<Result<Vec<_>>>()?;
        let m = Manifest {
            schema_version: MANIFEST_SCHEMA_VERSION,
            tool: "dimscope",
            version: env!("CARGO_PKG_VERSION"),
            command: self.command,
            argv: &self.argv,
            config: &self.config,
            parameters: &self.parameters,
            seeds: &self.seeds,
            threads: crate::worker_threads(),
            parallel: cfg!(feature = "parallel"),
            inputs: &self.inputs,
            outputs,
            elapsed_seconds: self.started.elapsed().as_secs_f64(),
        };
        let path = manifest_path(primary);
        let mut text = serde_json::to_string_pretty(&m)?;
        text.push('\n');
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}
