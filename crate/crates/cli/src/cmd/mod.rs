//! Subcommand implementations.

pub mod brito;
pub mod lsa;
pub mod mst;
pub mod sample;
pub mod schweinhart;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context as _, Result};
use dimscope::io::{read_cloud, CloudFormat};
use dimscope::PointCloud;
use serde::Serialize;

use crate::config::ConfigSnapshot;
use crate::manifest::Run;

pub struct Context {
    pub argv: Vec<String>,
    pub config: ConfigSnapshot,
}

impl Context {
    pub fn run(&self, command: &'static str, parameters: &impl Serialize) -> Result<Run> {
        Run::new(command, &self.argv, &self.config, parameters)
    }
}

/// Explicit format, else `bin` for `.bin`/`.dimc` files and CSV otherwise.
pub fn cloud_format(path: &Path, explicit: Option<CloudFormat>) -> CloudFormat {
    explicit.unwrap_or_else(|| match path.extension().and_then(|e| e.to_str()) {
        Some(e) if e.eq_ignore_ascii_case("bin") || e.eq_ignore_ascii_case("dimc") => CloudFormat::Bin,
        _ => CloudFormat::Csv,
    })
}

pub fn parse_format(s: &str) -> Result<CloudFormat, String> {
    s.parse().map_err(|e: dimscope::Error| e.to_string())
}

/// Reads a cloud and records it as a run input; `dedup` drops repeated
/// points.
pub fn load_cloud(run: &mut Run, path: &Path, dedup: bool) -> Result<PointCloud> {
    run.input(path)?;
    let cloud = read_cloud(path).with_context(|| format!("reading {}", path.display()))?;
    if !dedup {
        return Ok(cloud);
    }
    let unique = cloud.deduplicated();
    if unique.n() < cloud.n() {
        log::info!("dropped {} repeated points of {}", cloud.n() - unique.n(), cloud.n());
    }
    Ok(unique)
}

pub fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn check_sizes(sizes: &[usize], n: usize) -> Result<()> {
    if let Some(&m) = sizes.iter().find(|&&m| m > n) {
        bail!("size {m} exceeds the {n} points in the cloud");
    }
    Ok(())
}
