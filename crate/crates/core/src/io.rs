//! Point-cloud file formats.
//!
//! * CSV: header `x0,x1,...,x{d-1}`, one point per line, every value written
//!   with 17 significant digits so it parses back to the same `f64`.
//! * Binary: `DIMC`, `u32` version (1), `u64` n, `u32` d, then `n*d`
//!   little-endian `f64` values, row-major.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cloud::{CloudMeta, PointCloud};
use crate::error::{Error, Result};

pub const BINARY_MAGIC: &[u8; 4] = b"DIMC";
pub const BINARY_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CloudFormat {
    Csv,
    Bin,
}

impl FromStr for CloudFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(CloudFormat::Csv),
            "bin" | "binary" => Ok(CloudFormat::Bin),
            other => Err(Error::invalid(format!("unknown cloud format {other:?} (expected csv or bin)"))),
        }
    }
}

/// Formats a real so that parsing the text gives back the identical bits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_csv<W: Write>(cloud: &PointCloud, mut w: W) -> Result<()> {
    let header: Vec<String> = (0..cloud.d()).map(|k| format!("x{k}")).collect();
    writeln!(w, "{}", header.join(","))?;
    let mut line = String::new();
    for r in cloud.rows() {
        line.clear();
        for (k, x) in r.iter().enumerate() {
            if k > 0 {
                line.push(',');
            }
            line.push_str(&fmt_f64(*x));
        }
        line.push('\n');
        w.write_all(line.as_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: BufRead>(r: R, meta: CloudMeta) -> Result<PointCloud> {
    let mut lines = r.lines();
    let header = lines.next().ok_or_else(|| Error::Parse("empty CSV file".into()))??;
    let cols: Vec<&str> = header.trim().split(',').collect();
    for (k, c) in cols.iter().enumerate() {
        if c.trim() != format!("x{k}") {
            return Err(Error::Parse(format!("bad CSV header column {k}: {c:?}")));
        }
    }
    let d = cols.len();
    let mut points = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let before = points.len();
        for field in line.split(',') {
            let x: f64 =
                field.trim().parse().map_err(|_| Error::Parse(format!("line {}: bad number {field:?}", lineno + 2)))?;
            points.push(x);
        }
        if points.len() - before != d {
            return Err(Error::Parse(format!(
                "line {}: expected {d} fields, found {}",
                lineno + 2,
                points.len() - before
            )));
        }
    }
    PointCloud::new(points, d, meta)
}

pub fn write_binary<W: Write>(cloud: &PointCloud, mut w: W) -> Result<()> {
    let d = u32::try_from(cloud.d()).map_err(|_| Error::invalid("dimension does not fit in u32"))?;
    w.write_all(BINARY_MAGIC)?;
    w.write_all(&BINARY_VERSION.to_le_bytes())?;
    w.write_all(&(cloud.n() as u64).to_le_bytes())?;
    w.write_all(&d.to_le_bytes())?;
    for x in cloud.as_slice() {
        w.write_all(&x.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_binary<R: Read>(mut r: R, meta: CloudMeta) -> Result<PointCloud> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != BINARY_MAGIC {
        return Err(Error::Parse("missing DIMC magic".into()));
    }
    let mut b4 = [0u8; 4];
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b4)?;
    let version = u32::from_le_bytes(b4);
    if version != BINARY_VERSION {
        return Err(Error::Parse(format!("unsupported binary cloud version {version}")));
    }
    r.read_exact(&mut b8)?;
    let n = u64::from_le_bytes(b8) as usize;
    r.read_exact(&mut b4)?;
    let d = u32::from_le_bytes(b4) as usize;
    let total = n.checked_mul(d).ok_or_else(|| Error::Parse("n*d overflows".into()))?;
    let mut points = Vec::with_capacity(total);
    for _ in 0..total {
        r.read_exact(&mut b8)?;
        points.push(f64::from_le_bytes(b8));
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(Error::Parse("trailing bytes after binary cloud payload".into()));
    }
    PointCloud::new(points, d, meta)
}

/// Reads a cloud, detecting the format from the leading bytes.
pub fn read_cloud(path: impl AsRef<Path>) -> Result<PointCloud> {
    let path = path.as_ref();
    let mut reader = BufReader::new(File::open(path)?);
    let meta = CloudMeta::new("file").with_param("path", path.display());
    let head = reader.fill_buf()?;
    if head.starts_with(BINARY_MAGIC) {
        read_binary(reader, meta)
    } else {
        read_csv(reader, meta)
    }
}

pub fn write_cloud(cloud: &PointCloud, path: impl AsRef<Path>, format: CloudFormat) -> Result<()> {
    let w = BufWriter::new(File::create(path)?);
    match format {
        CloudFormat::Csv => write_csv(cloud, w),
        CloudFormat::Bin => write_binary(cloud, w),
    }
}
