//! Bayesian integer dimension from the mean squared spanning-tree degree.
//!
//! The statistic `M = (1/n) Σ deg(v)²` of the Euclidean spanning tree has a
//! limit that depends only on the dimension of the sampled manifold. It is
//! calibrated on uniform cubes `[0,1]^i` for every candidate `i`, giving a mean
//! `μ̂_i` and a size-free variance `σ̂²_i ≈ n·Var(M_n)`. An observed `M′` at
//! size `n′` is then scored against `N(μ̂_i, σ̂²_i / n′)` under a uniform prior
//! over the candidates.

use std::collections::BTreeMap;
use std::io::Write;
use std::ops::RangeInclusive;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cloud::{subsample_stream, CloudMeta, PointCloud};
use crate::error::{Error, Result};
use crate::io::fmt_f64;
use crate::mst::build_emst;
use crate::par;
use crate::rng::Seed;
use crate::schweinhart::SizeSchedule;

pub const DEFAULT_DIMS: RangeInclusive<usize> = 2..=15;
pub const DEFAULT_N_CAL: usize = 2000;
pub const DEFAULT_L: usize = 100;
/// Lower bound for `σ̂²`. One-dimensional draws all give the same statistic,
/// and a zero variance would leave the posterior undefined.
pub const SIGMA2_FLOOR: f64 = 1e-12;
pub const CALIBRATION_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationEntry {
    pub i: usize,
    pub mu_hat: f64,
    /// `n_cal` times the unbiased sample variance of `M`.
    pub sigma2_hat: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BritoCalibration {
    #[serde(default = "calibration_schema")]
    pub schema_version: u32,
    pub dims: Vec<usize>,
    pub n_cal: usize,
    #[serde(rename = "L")]
    pub l: usize,
    pub seed: Seed,
    pub entries: Vec<CalibrationEntry>,
    /// Run manifest that produced the table, when written by the CLI.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest: Option<String>,
}

fn calibration_schema() -> u32 {
    CALIBRATION_SCHEMA_VERSION
}

impl BritoCalibration {
    /// Builds a table from precomputed entries, e.g. a hand-made one.
    pub fn from_entries(entries: Vec<CalibrationEntry>, n_cal: usize, l: usize, seed: Seed) -> Result<Self> {
        let table = BritoCalibration {
            schema_version: CALIBRATION_SCHEMA_VERSION,
            dims: entries.iter().map(|e| e.i).collect(),
            n_cal,
            l,
            seed,
            entries,
            manifest: None,
        };
        table.validate()?;
        Ok(table)
    }

    pub fn validate(&self) -> Result<()> {
        if self.entries.is_empty() {
            return Err(Error::invalid("calibration table is empty"));
        }
        if self.dims.len() != self.entries.len() || self.dims.iter().zip(&self.entries).any(|(d, e)| *d != e.i) {
            return Err(Error::invalid("calibration dims do not match its entries"));
        }
        if self.entries.windows(2).any(|w| w[1].i != w[0].i + 1) {
            return Err(Error::invalid("calibrated dimensions must be a contiguous ascending range"));
        }
        for e in &self.entries {
            if !e.mu_hat.is_finite() || !(e.sigma2_hat > 0.0 && e.sigma2_hat.is_finite()) {
                return Err(Error::invalid(format!(
                    "dimension {}: need finite mu_hat and positive sigma2_hat, got {} and {}",
                    e.i, e.mu_hat, e.sigma2_hat
                )));
            }
        }
        Ok(())
    }

    /// Calibrated candidates as `lo..=hi`.
    pub fn candidates(&self) -> RangeInclusive<usize> {
        self.dims[0]..=*self.dims.last().unwrap()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let table: BritoCalibration = serde_json::from_str(text)?;
        table.validate()?;
        Ok(table)
    }
}

/// The `replicate`-th uniform sample of `[0,1]^dim` used by [`calibrate`].
pub fn calibration_draw(dim: usize, n_cal: usize, replicate: usize, seed: Seed) -> Result<PointCloud> {
    let mut rng = seed.stream("brito-calibration", &[dim as u64, n_cal as u64, replicate as u64]);
    let points = (0..dim * n_cal).map(|_| rng.random::<f64>()).collect();
    let meta = CloudMeta::new("unit-cube").with_param("dim", dim).with_param("replicate", replicate).with_seed(seed);
    PointCloud::new(points, dim, meta)
}

pub fn calibrate(dims: RangeInclusive<usize>, n_cal: usize, l: usize, seed: Seed) -> Result<BritoCalibration> {
    if dims.is_empty() || *dims.start() < 1 {
        return Err(Error::invalid(format!(
            "candidate dimensions must be a nonempty range of values >= 1, got {dims:?}"
        )));
    }
    if n_cal < 100 {
        return Err(Error::invalid(format!("n_cal must be at least 100, got {n_cal}")));
    }
    if l < 2 {
        return Err(Error::invalid(format!("L must be at least 2, got {l}")));
    }
    let dims: Vec<usize> = dims.collect();
    let jobs: Vec<(usize, usize)> = dims.iter().flat_map(|&i| (0..l).map(move |j| (i, j))).collect();
    let stats = par::try_map_slice(&jobs, |&(i, j)| -> Result<f64> {
        let cloud = calibration_draw(i, n_cal, j, seed)?;
        Ok(build_emst(&cloud)?.degree_statistic())
    })?;
    let entries = dims
        .iter()
        .zip(stats.chunks(l))
        .map(|(&i, m)| {
            let mean = m.iter().sum::<f64>() / l as f64;
            let var = m.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (l - 1) as f64;
            CalibrationEntry { i, mu_hat: mean, sigma2_hat: (n_cal as f64 * var).max(SIGMA2_FLOOR) }
        })
        .collect();
    let table =
        BritoCalibration { schema_version: CALIBRATION_SCHEMA_VERSION, dims, n_cal, l, seed, entries, manifest: None };
    table.validate()?;
    Ok(table)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BritoEstimate {
    pub m_prime: f64,
    pub n_prime: usize,
    pub posterior: BTreeMap<usize, f64>,
    pub expected_dim: f64,
    pub d_bqy: i64,
}

pub fn posterior(m_prime: f64, n_prime: usize, calib: &BritoCalibration) -> Result<BritoEstimate> {
    if n_prime < 2 {
        return Err(Error::invalid(format!("n_prime must be at least 2, got {n_prime}")));
    }
    if !m_prime.is_finite() {
        return Err(Error::invalid(format!("observed statistic must be finite, got {m_prime}")));
    }
    calib.validate()?;
    let log_dens: Vec<f64> = calib
        .entries
        .iter()
        .map(|e| {
            let v = e.sigma2_hat / n_prime as f64;
            -0.5 * (2.0 * std::f64::consts::PI * v).ln() - (m_prime - e.mu_hat).powi(2) / (2.0 * v)
        })
        .collect();
    let max = log_dens.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(Error::OutOfRange(format!(
            "M' = {m_prime} has no finite likelihood under any calibrated dimension"
        )));
    }
    let w: Vec<f64> = log_dens.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = w.iter().sum();
    let posterior: BTreeMap<usize, f64> = calib.entries.iter().zip(&w).map(|(e, wi)| (e.i, wi / total)).collect();
    let expected_dim = posterior.iter().map(|(i, p)| *i as f64 * p).sum::<f64>();
    Ok(BritoEstimate { m_prime, n_prime, posterior, expected_dim, d_bqy: expected_dim.round() as i64 })
}

pub fn estimate(cloud: &PointCloud, calib: &BritoCalibration) -> Result<BritoEstimate> {
    if cloud.n() < 2 {
        return Err(Error::invalid("estimate needs at least 2 points"));
    }
    let m = build_emst(cloud)?.degree_statistic();
    posterior(m, cloud.n(), calib)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub size: usize,
    pub replicate: usize,
    pub expected_dim: f64,
    pub d_bqy: i64,
}

/// Estimates on independent subsamples of every schedule size.
pub fn convergence_curve(
    cloud: &PointCloud,
    sizes: &SizeSchedule,
    calib: &BritoCalibration,
    seed: Seed,
) -> Result<Vec<CurvePoint>> {
    if sizes.max_size() > cloud.n() {
        return Err(Error::invalid(format!(
            "largest size {} exceeds the {} available points",
            sizes.max_size(),
            cloud.n()
        )));
    }
    let jobs: Vec<(usize, usize)> =
        sizes.sizes().iter().flat_map(|&m| (0..sizes.replicates()).map(move |r| (m, r))).collect();
    par::try_map_slice(&jobs, |&(m, r)| {
        let sample = subsample_stream(cloud, m, seed, "brito-convergence", &[m as u64, r as u64])?;
        let est = estimate(&sample, calib)?;
        Ok(CurvePoint { size: m, replicate: r, expected_dim: est.expected_dim, d_bqy: est.d_bqy })
    })
}

/// CSV `size,expected_dim,d_bqy`.
pub fn write_curve_csv<W: Write>(curve: &[CurvePoint], mut w: W) -> Result<()> {
    writeln!(w, "size,expected_dim,d_bqy")?;
    for p in curve {
        writeln!(w, "{},{},{}", p.size, fmt_f64(p.expected_dim), p.d_bqy)?;
    }
    w.flush()?;
    Ok(())
}
