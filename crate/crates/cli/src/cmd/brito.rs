use std::ops::RangeInclusive;
use std::path::PathBuf;

use anyhow::{bail, Context as _, Result};
use clap::Args;
use dimscope::brito::{
    calibrate as build_calibration, convergence_curve, estimate, write_curve_csv, BritoCalibration, BritoEstimate,
    CurvePoint, DEFAULT_L, DEFAULT_N_CAL,
};
use dimscope::schweinhart::SizeSchedule;
use dimscope::{Error, Seed};
use serde::Serialize;

use super::{check_sizes, create, load_cloud, write_json, Context};
use crate::manifest::manifest_name;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// `a..b` (inclusive, as in `2..15`), `a..=b` or a single dimension.
fn parse_dims(s: &str) -> Result<RangeInclusive<usize>, String> {
    let bad = || format!("expected a dimension range like 2..15, got {s:?}");
    let (lo, hi) = match s.split_once("..") {
        Some((lo, hi)) => (lo, hi.strip_prefix('=').unwrap_or(hi)),
        None => (s, s),
    };
    let lo: usize = lo.trim().parse().map_err(|_| bad())?;
    let hi: usize = hi.trim().parse().map_err(|_| bad())?;
    if lo == 0 || hi < lo {
        return Err(bad());
    }
    Ok(lo..=hi)
}

#[derive(Args, Debug, Serialize)]
pub struct CalibrateArgs {
    /// Candidate dimensions, inclusive.
    #[arg(long, default_value = "2..15", value_parser = parse_dims)]
    dims: RangeInclusive<usize>,
    /// Points per hypercube draw.
    #[arg(long, default_value_t = DEFAULT_N_CAL)]
    n_cal: usize,
    /// Draws per dimension.
    #[arg(long = "L", default_value_t = DEFAULT_L)]
    l: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

pub fn calibrate(ctx: &Context, a: CalibrateArgs) -> Result<()> {
    let mut run = ctx.run("brito-calibrate", &a)?;
    run.seed("seed", a.seed);
    let mut table = build_calibration(a.dims.clone(), a.n_cal, a.l, Seed::new(a.seed))?;
    table.manifest = Some(manifest_name(&a.out));
    write_json(&a.out, &table)?;
    run.finish(&a.out, &[&a.out])?;
    println!("calibrated dimensions {}..={} with n_cal={}, L={}", a.dims.start(), a.dims.end(), a.n_cal, a.l);
    Ok(())
}

#[derive(Args, Debug, Serialize)]
pub struct BritoArgs {
    /// Point cloud (CSV or binary).
    cloud: PathBuf,
    /// Drop repeated points before building trees.
    #[arg(long)]
    dedup: bool,
    /// Table written by `brito-calibrate`.
    #[arg(long)]
    calib: PathBuf,
    /// Subsample sizes for the convergence curve; by default five sizes
    /// from a tenth of the cloud up to all of it.
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    /// Independent subsamples per size.
    #[arg(long, default_value_t = 1)]
    replicates: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// JSON report.
    #[arg(long)]
    out: PathBuf,
    /// Convergence curve `size,expected_dim,d_bqy`.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Serialize)]
struct CalibrationSummary<'a> {
    path: &'a std::path::Path,
    dims: [usize; 2],
    n_cal: usize,
    #[serde(rename = "L")]
    l: usize,
    seed: Seed,
}

#[derive(Serialize)]
struct BritoReport<'a> {
    schema_version: u32,
    n_points: usize,
    calibration: CalibrationSummary<'a>,
    seed: Seed,
    estimate: BritoEstimate,
    curve: Vec<CurvePoint>,
    manifest: String,
}

fn default_sizes(n: usize) -> Vec<usize> {
    let lo = (n / 10).max(2) as f64;
    let mut sizes: Vec<usize> = (0..5).map(|k| (lo * (n as f64 / lo).powf(k as f64 / 4.0)).round() as usize).collect();
    sizes.dedup();
    sizes
}

fn load_calibration(path: &std::path::Path) -> Result<BritoCalibration> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading calibration {}", path.display()))?;
    BritoCalibration::from_json(&text).with_context(|| format!("calibration {} is not usable", path.display()))
}

fn in_range<T>(r: dimscope::Result<T>, calib: &BritoCalibration) -> Result<T> {
    match r {
        Err(Error::OutOfRange(msg)) => {
            let c = calib.candidates();
            bail!("{msg}; the calibration covers dimensions {}..={} only", c.start(), c.end())
        }
        other => Ok(other?),
    }
}

pub fn run(ctx: &Context, a: BritoArgs) -> Result<()> {
    let mut run = ctx.run("brito", &a)?;
    run.seed("seed", a.seed);
    run.input(&a.calib)?;
    let calib = load_calibration(&a.calib)?;
    let cloud = load_cloud(&mut run, &a.cloud, a.dedup)?;
    let sizes = match &a.sizes {
        Some(s) => {
            check_sizes(s, cloud.n())?;
            s.clone()
        }
        None => default_sizes(cloud.n()),
    };
    let schedule = SizeSchedule::new(sizes, a.replicates)?;
    let seed = Seed::new(a.seed);
    let full = in_range(estimate(&cloud, &calib), &calib)?;
    let (lo, hi) = calib
        .entries
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), e| (lo.min(e.mu_hat), hi.max(e.mu_hat)));
    if full.m_prime < lo || full.m_prime > hi {
        let c = calib.candidates();
        log::warn!(
            "observed statistic {:.4} lies outside the calibrated means [{lo:.4}, {hi:.4}]; \
             the estimate is pinned to the edge of dimensions {}..={}",
            full.m_prime,
            c.start(),
            c.end()
        );
    }
    let curve = in_range(convergence_curve(&cloud, &schedule, &calib, seed), &calib)?;
    let c = calib.candidates();
    let report = BritoReport {
        schema_version: REPORT_SCHEMA_VERSION,
        n_points: cloud.n(),
        calibration: CalibrationSummary {
            path: &a.calib,
            dims: [*c.start(), *c.end()],
            n_cal: calib.n_cal,
            l: calib.l,
            seed: calib.seed,
        },
        seed,
        estimate: full,
        curve,
        manifest: manifest_name(&a.out),
    };
    write_json(&a.out, &report)?;
    let mut outputs = vec![a.out.as_path()];
    if let Some(csv) = &a.csv {
        write_curve_csv(&report.curve, create(csv)?)?;
        outputs.push(csv);
    }
    run.finish(&a.out, &outputs)?;
    println!(
        "d_bqy = {} (expected dimension {:.4}, n = {})",
        report.estimate.d_bqy,
        report.estimate.expected_dim,
        cloud.n()
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dims_syntax() {
        assert_eq!(parse_dims("2..15").unwrap(), 2..=15);
        assert_eq!(parse_dims("2..=15").unwrap(), 2..=15);
        assert_eq!(parse_dims("4").unwrap(), 4..=4);
        assert!(parse_dims("5..2").is_err());
        assert!(parse_dims("0..3").is_err());
        assert!(parse_dims("a..b").is_err());
    }

    #[test]
    fn default_sizes_end_at_the_cloud() {
        let s = default_sizes(1000);
        assert_eq!(s, vec![100, 178, 316, 562, 1000]);
        assert!(default_sizes(3).windows(2).all(|w| w[0] < w[1]));
    }
}
