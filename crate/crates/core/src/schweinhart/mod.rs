//! Growth-rate dimension estimation from power-weighted spanning trees.
//!
//! For i.i.d. samples from a `d`-Ahlfors regular measure and `0 < α < d`,
//! `E_α(n) = Σ_{e ∈ T_n} |e|^α` grows like `n^((d-α)/d)`. Fitting
//! `ln E_α = ln C + β ln n` over a ladder of subsample sizes gives
//! `β = 1 - α/d`, hence `d̂ = α / (1 - β̂)`.
//!
//! The slope is fitted by ordinary least squares in log-log space and its 95%
//! t-interval is mapped through `β ↦ α/(1-β)`, which is monotone for `β < 1`.
//! A fit is *admissible* when
//!
//! 1. the 95% band of the fitted line, read back on the `E_α` scale, stays
//!    within a relative halfwidth `γ` at every design size,
//! 2. the relative halfwidth of the slope interval is at most `γ`,
//! 3. the slope interval lies below 1, and
//! 4. `α < d̂`.
//!
//! Inadmissible records stay in the report with their reason, so the whole
//! `d̂(α)` curve can be plotted.

mod regression;

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::cloud::{subsample_stream, PointCloud};
use crate::error::{Error, Result};
use crate::io::fmt_f64;
use crate::mst::build_emst;
use crate::par;
use crate::rng::Seed;

pub const DEFAULT_N_MIN: usize = 2000;
pub const DEFAULT_SIZE_COUNT: usize = 8;
pub const DEFAULT_REPLICATES: usize = 3;
pub const DEFAULT_GAMMA: f64 = 0.1;
/// Fewest distinct sizes a regression is run on.
pub const MIN_SIZES: usize = 5;
pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Ascending subsample sizes, each drawn `replicates` times.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SizeSchedule {
    sizes: Vec<usize>,
    replicates: usize,
}

impl SizeSchedule {
    pub fn new(sizes: Vec<usize>, replicates: usize) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::invalid("size schedule is empty"));
        }
        if sizes[0] < 2 {
            return Err(Error::invalid(format!("smallest size must be at least 2, got {}", sizes[0])));
        }
        if sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid(format!("sizes must be strictly increasing: {sizes:?}")));
        }
        if replicates == 0 {
            return Err(Error::invalid("replicates must be at least 1"));
        }
        Ok(SizeSchedule { sizes, replicates })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn replicates(&self) -> usize {
        self.replicates
    }

    pub fn with_replicates(mut self, replicates: usize) -> Result<Self> {
        if replicates == 0 {
            return Err(Error::invalid("replicates must be at least 1"));
        }
        self.replicates = replicates;
        Ok(self)
    }

    pub fn max_size(&self) -> usize {
        *self.sizes.last().expect("schedule is never empty")
    }

    fn check_fits(&self, n: usize) -> Result<()> {
        if self.max_size() > n {
            return Err(Error::invalid(format!(
                "largest schedule size {} exceeds the {n} available points",
                self.max_size()
            )));
        }
        Ok(())
    }

    fn check_regression(&self) -> Result<()> {
        if self.sizes.len() < MIN_SIZES {
            return Err(Error::invalid(format!(
                "regression needs at least {MIN_SIZES} distinct sizes, schedule has {}",
                self.sizes.len()
            )));
        }
        Ok(())
    }
}

/// `count` sizes in geometric progression from `n_min` to `n_total`, rounded
/// and deduplicated, with [`DEFAULT_REPLICATES`] replicates.
pub fn schedule_sizes(n_total: usize, n_min: usize, count: usize) -> Result<SizeSchedule> {
    if n_min < 2 || n_min >= n_total {
        return Err(Error::invalid(format!("need 2 <= n_min < n_total, got n_min={n_min}, n_total={n_total}")));
    }
    if count < MIN_SIZES {
        return Err(Error::invalid(format!("need at least {MIN_SIZES} sizes, got {count}")));
    }
    let ratio = n_total as f64 / n_min as f64;
    let mut sizes: Vec<usize> = (0..count)
        .map(|k| {
            if k + 1 == count {
                n_total
            } else {
                (n_min as f64 * ratio.powf(k as f64 / (count - 1) as f64)).round() as usize
            }
        })
        .collect();
    sizes.dedup();
    if sizes.len() < MIN_SIZES {
        return Err(Error::invalid(format!(
            "only {} distinct sizes between {n_min} and {n_total}; at least {MIN_SIZES} are needed",
            sizes.len()
        )));
    }
    SizeSchedule::new(sizes, DEFAULT_REPLICATES)
}

/// The `α` values `start, start + step, ...` up to `stop` inclusive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Default for AlphaGrid {
    fn default() -> Self {
        AlphaGrid { start: 1e-4, stop: 10.0, step: 0.1 }
    }
}

impl AlphaGrid {
    pub fn values(&self) -> Result<Vec<f64>> {
        let AlphaGrid { start, stop, step } = *self;
        if !(start > 0.0 && start.is_finite() && stop.is_finite() && stop >= start) {
            return Err(Error::invalid(format!("alpha grid needs 0 < start <= stop, got [{start}, {stop}]")));
        }
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::invalid(format!("alpha step must be positive, got {step}")));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        Ok((0..count).map(|i| start + i as f64 * step).collect())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectionReason {
    None,
    /// The band of the fitted line is wider than `γ`.
    LineCi,
    /// The slope interval is wider than `γ` relative to the slope.
    ParamCi,
    /// The slope interval reaches 1, so the upper dimension bound is infinite.
    SlopeGeOne,
    /// `α >= d̂`, outside the range where the growth law holds.
    AlphaGeDhat,
    /// The regression could not be run at all.
    Degenerate,
}

/// One `α` of the sweep. Undefined quantities are NaN (null in JSON).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitRecord {
    pub alpha: f64,
    #[serde(with = "nullable")]
    pub d_hat: f64,
    #[serde(with = "nullable")]
    pub slope: f64,
    #[serde(with = "nullable")]
    pub intercept: f64,
    #[serde(with = "nullable")]
    pub slope_ci_low: f64,
    #[serde(with = "nullable")]
    pub slope_ci_high: f64,
    #[serde(with = "nullable")]
    pub ci_low: f64,
    #[serde(with = "nullable")]
    pub ci_high: f64,
    /// Largest relative halfwidth of the line's 95% band on the `E_α` scale.
    #[serde(with = "nullable")]
    pub line_ci_rel: f64,
    /// Relative halfwidth of the 95% slope interval.
    #[serde(with = "nullable")]
    pub param_ci_rel: f64,
    pub admissible: bool,
    pub rejection_reason: RejectionReason,
}

impl FitRecord {
    fn degenerate(alpha: f64) -> Self {
        FitRecord {
            alpha,
            d_hat: f64::NAN,
            slope: f64::NAN,
            intercept: f64::NAN,
            slope_ci_low: f64::NAN,
            slope_ci_high: f64::NAN,
            ci_low: f64::NAN,
            ci_high: f64::NAN,
            line_ci_rel: f64::NAN,
            param_ci_rel: f64::NAN,
            admissible: false,
            rejection_reason: RejectionReason::Degenerate,
        }
    }
}

mod nullable {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("gamma must lie in (0, 1), got {gamma}")))
    }
}

/// Fits `ln E = c + β ln n` to `(ln n_k, ln E_k)` pairs and converts the slope
/// to a dimension estimate for the given `α`.
pub fn fit_log_log(log_sizes: &[f64], log_e: &[f64], alpha: f64, gamma: f64) -> Result<FitRecord> {
    check_gamma(gamma)?;
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::invalid(format!("alpha must be positive, got {alpha}")));
    }
    if log_sizes.len() != log_e.len() {
        return Err(Error::invalid("size and statistic series differ in length"));
    }
    if log_sizes.len() < MIN_SIZES {
        return Err(Error::invalid(format!("regression needs at least {MIN_SIZES} points")));
    }
    let degenerate = |reason: &str| Error::DegenerateFit { alpha, reason: reason.to_string() };
    if log_e.iter().any(|y| !y.is_finite()) {
        return Err(degenerate("non-finite or non-positive E_alpha"));
    }
    let fit = regression::ols(log_sizes, log_e).ok_or_else(|| degenerate("sizes have no spread"))?;

    let slope = fit.slope;
    let half = fit.t95 * fit.slope_se;
    let (lo, hi) = (slope - half, slope + half);
    let to_dim = |b: f64| if b < 1.0 { alpha / (1.0 - b) } else { f64::NAN };
    let d_hat = to_dim(slope);
    let ci_low = to_dim(lo);
    let ci_high = if hi < 1.0 { alpha / (1.0 - hi) } else { f64::INFINITY };
    let line_ci_rel = fit.band.iter().fold(0.0f64, |m, h| m.max(h.exp_m1()));
    let param_ci_rel = half / slope.abs();

    let reason = if line_ci_rel.is_nan() || line_ci_rel > gamma {
        RejectionReason::LineCi
    } else if param_ci_rel.is_nan() || param_ci_rel > gamma {
        RejectionReason::ParamCi
    } else if hi >= 1.0 {
        RejectionReason::SlopeGeOne
    } else if alpha >= d_hat {
        RejectionReason::AlphaGeDhat
    } else {
        RejectionReason::None
    };
    Ok(FitRecord {
        alpha,
        d_hat,
        slope,
        intercept: fit.intercept,
        slope_ci_low: lo,
        slope_ci_high: hi,
        ci_low,
        ci_high,
        line_ci_rel,
        param_ci_rel,
        admissible: reason == RejectionReason::None,
        rejection_reason: reason,
    })
}

/// `ln Σ w^α` without underflow; zero-length edges contribute nothing.
fn log_power_sum(weights: &[f64], alpha: f64) -> f64 {
    let mut max = f64::NEG_INFINITY;
    for &w in weights {
        if w > 0.0 {
            max = max.max(alpha * w.ln());
        }
    }
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let s: f64 = weights.iter().filter(|w| **w > 0.0).map(|w| (alpha * w.ln() - max).exp()).sum();
    max + s.ln()
}

/// Spanning-tree edge lengths for every `(size, replicate)` of a schedule.
/// Built once and reused for every `α`.
#[derive(Clone, Debug)]
pub struct TreeLadder {
    schedule: SizeSchedule,
    /// `weights[size_index][replicate]`.
    weights: Vec<Vec<Vec<f64>>>,
}

impl TreeLadder {
    pub fn build(cloud: &PointCloud, schedule: &SizeSchedule, seed: Seed) -> Result<Self> {
        schedule.check_fits(cloud.n())?;
        let jobs: Vec<(usize, usize)> =
            (0..schedule.sizes.len()).flat_map(|s| (0..schedule.replicates).map(move |r| (s, r))).collect();
        let trees = par::try_map_slice(&jobs, |&(s, r)| -> Result<Vec<f64>> {
            let m = schedule.sizes[s];
            let sample = subsample_stream(cloud, m, seed, "schweinhart-subsample", &[m as u64, r as u64])?;
            Ok(build_emst(&sample)?.weights().collect())
        })?;
        let mut it = trees.into_iter();
        let weights = (0..schedule.sizes.len()).map(|_| it.by_ref().take(schedule.replicates).collect()).collect();
        Ok(TreeLadder { schedule: schedule.clone(), weights })
    }

    pub fn schedule(&self) -> &SizeSchedule {
        &self.schedule
    }

    /// `(ln n_k, mean over replicates of ln E_α)` for every size.
    pub fn log_series(&self, alpha: f64) -> (Vec<f64>, Vec<f64>) {
        let x = self.schedule.sizes.iter().map(|&m| (m as f64).ln()).collect();
        let y = self
            .weights
            .iter()
            .map(|reps| reps.iter().map(|w| log_power_sum(w, alpha)).sum::<f64>() / reps.len() as f64)
            .collect();
        (x, y)
    }

    /// Fails with a degenerate fit when `E_α` is the same at every size:
    /// sampled trees that never change carry no growth rate.
    pub fn fit(&self, alpha: f64, gamma: f64) -> Result<FitRecord> {
        let (x, y) = self.log_series(alpha);
        if y.iter().all(|v| *v == y[0]) {
            return Err(Error::DegenerateFit { alpha, reason: "E_alpha is identical at every size".into() });
        }
        fit_log_log(&x, &y, alpha, gamma)
    }
}

pub fn fit_dimension(
    cloud: &PointCloud,
    alpha: f64,
    schedule: &SizeSchedule,
    gamma: f64,
    seed: Seed,
) -> Result<FitRecord> {
    check_gamma(gamma)?;
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::invalid(format!("alpha must be positive, got {alpha}")));
    }
    schedule.check_regression()?;
    TreeLadder::build(cloud, schedule, seed)?.fit(alpha, gamma)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchweinhartReport {
    pub schema_version: u32,
    pub alpha_grid: AlphaGrid,
    pub gamma: f64,
    pub n_points: usize,
    pub schedule: SizeSchedule,
    pub seed: Seed,
    pub records: Vec<FitRecord>,
    /// Smallest and largest `d̂` over admissible records; null when none.
    pub d_min: Option<f64>,
    pub d_max: Option<f64>,
    /// Maximal runs of consecutive admissible grid values, as `[first, last]`.
    #[serde(rename = "admissible")]
    pub admissible_alpha: Vec<[f64; 2]>,
    /// Name of the run manifest that produced this report, when written by
    /// the command-line tool.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest: Option<String>,
}

impl SchweinhartReport {
    pub fn from_records(
        records: Vec<FitRecord>,
        alpha_grid: AlphaGrid,
        gamma: f64,
        n_points: usize,
        schedule: SizeSchedule,
        seed: Seed,
    ) -> Self {
        let admissible: Vec<&FitRecord> = records.iter().filter(|r| r.admissible).collect();
        let d_min = admissible.iter().map(|r| r.d_hat).reduce(f64::min);
        let d_max = admissible.iter().map(|r| r.d_hat).reduce(f64::max);
        let mut runs: Vec<[f64; 2]> = Vec::new();
        let mut open = false;
        for r in &records {
            match (r.admissible, open) {
                (true, true) => runs.last_mut().unwrap()[1] = r.alpha,
                (true, false) => runs.push([r.alpha, r.alpha]),
                _ => {}
            }
            open = r.admissible;
        }
        SchweinhartReport {
            schema_version: REPORT_SCHEMA_VERSION,
            alpha_grid,
            gamma,
            n_points,
            schedule,
            seed,
            records,
            d_min,
            d_max,
            admissible_alpha: runs,
            manifest: None,
        }
    }

    pub fn admissible_records(&self) -> impl Iterator<Item = &FitRecord> {
        self.records.iter().filter(|r| r.admissible)
    }

    /// CSV `alpha,d_hat,ci_low,ci_high,admissible` for plotting.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "alpha,d_hat,ci_low,ci_high,admissible")?;
        for r in &self.records {
            writeln!(
                w,
                "{},{},{},{},{}",
                fmt_f64(r.alpha),
                fmt_f64(r.d_hat),
                fmt_f64(r.ci_low),
                fmt_f64(r.ci_high),
                r.admissible
            )?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Fits every `α` of the grid against one shared set of subsample trees.
pub fn sweep_alpha(
    cloud: &PointCloud,
    grid: AlphaGrid,
    schedule: &SizeSchedule,
    gamma: f64,
    seed: Seed,
) -> Result<SchweinhartReport> {
    check_gamma(gamma)?;
    schedule.check_regression()?;
    let alphas = grid.values()?;
    let ladder = TreeLadder::build(cloud, schedule, seed)?;
    sweep_ladder(&ladder, &alphas, grid, gamma, cloud.n(), seed)
}

pub fn sweep_ladder(
    ladder: &TreeLadder,
    alphas: &[f64],
    grid: AlphaGrid,
    gamma: f64,
    n_points: usize,
    seed: Seed,
) -> Result<SchweinhartReport> {
    check_gamma(gamma)?;
    let records = par::try_map_slice(alphas, |&alpha| match ladder.fit(alpha, gamma) {
        Ok(r) => Ok(r),
        Err(Error::DegenerateFit { alpha, reason }) => {
            log::warn!("alpha={alpha}: {reason}");
            Ok(FitRecord::degenerate(alpha))
        }
        Err(e) => Err(e),
    })?;
    Ok(SchweinhartReport::from_records(records, grid, gamma, n_points, ladder.schedule().clone(), seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_series_fits_but_identical_trees_are_degenerate() {
        let x: Vec<f64> = [10.0f64, 20.0, 40.0, 80.0, 160.0].iter().map(|v| v.ln()).collect();
        let r = fit_log_log(&x, &[2.0; 5], 1.0, 0.1).unwrap();
        assert_eq!(r.d_hat, 1.0);
        // Zero slope: its relative interval is undefined.
        assert_eq!(r.rejection_reason, RejectionReason::ParamCi);

        // Points at 0 and 1 only: every tree has total power sum 1 (or 0
        // when a subsample misses one value), never a growth rate.
        let pts: Vec<f64> = (0..40).map(|i| (i % 2) as f64).collect();
        let cloud = PointCloud::new(pts, 1, crate::cloud::CloudMeta::new("t")).unwrap();
        let schedule = SizeSchedule::new(vec![4, 8, 16, 32, 40], 1).unwrap();
        let ladder = TreeLadder::build(&cloud, &schedule, Seed(1)).unwrap();
        assert!(matches!(ladder.fit(1.0, 0.1), Err(Error::DegenerateFit { .. })));
    }
    use crate::cloud::CloudMeta;
    use crate::geometry::{sample_manifold, ManifoldSpec};

    #[test]
    fn geometric_schedule() {
        let s = schedule_sizes(100_000, 10_000, 5).unwrap();
        assert_eq!(s.sizes(), &[10_000, 17_783, 31_623, 56_234, 100_000]);
        assert_eq!(s.replicates(), DEFAULT_REPLICATES);
        assert_eq!(schedule_sizes(32, 2, 5).unwrap().sizes(), &[2, 4, 8, 16, 32]);
    }

    #[test]
    fn schedule_deduplicates() {
        // 2·6^(k/7): 2, 2.58, 3.34, 4.31, 5.57, 7.19, 9.29, 12 -> 2,3,3,4,6,7,9,12
        let s = schedule_sizes(12, 2, 8).unwrap();
        assert_eq!(s.sizes(), &[2, 3, 4, 6, 7, 9, 12]);
        assert!(s.sizes().windows(2).all(|w| w[0] < w[1]));
        // Nearly coincident endpoints collapse below the regression minimum.
        assert!(matches!(schedule_sizes(1000, 999, 5), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn schedule_validation() {
        assert!(schedule_sizes(100, 1, 5).is_err());
        assert!(schedule_sizes(100, 100, 5).is_err());
        assert!(schedule_sizes(100, 10, 4).is_err());
        assert!(SizeSchedule::new(vec![5, 5, 6], 1).is_err());
        assert!(SizeSchedule::new(vec![1, 5], 1).is_err());
        assert!(SizeSchedule::new(vec![2, 5], 0).is_err());
        assert!(SizeSchedule::new(vec![7], 1).is_ok());
    }

    #[test]
    fn default_grid() {
        let v = AlphaGrid::default().values().unwrap();
        assert_eq!(v.len(), 100);
        assert_eq!(v[0], 1e-4);
        assert!((v[99] - 9.9001).abs() < 1e-12);
        let exact = AlphaGrid { start: 1.0, stop: 10.0, step: 1.0 }.values().unwrap();
        assert_eq!(exact, (1..=10).map(f64::from).collect::<Vec<_>>());
        assert!(AlphaGrid { start: 0.0, stop: 1.0, step: 0.1 }.values().is_err());
        assert!(AlphaGrid { start: 1.0, stop: 2.0, step: 0.0 }.values().is_err());
    }

    #[test]
    fn exact_power_law() {
        let sizes = [100.0f64, 200.0, 400.0, 800.0, 1600.0];
        let x: Vec<f64> = sizes.iter().map(|m| m.ln()).collect();
        let y: Vec<f64> = sizes.iter().map(|m| (7.0 * m.powf(0.5)).ln()).collect();
        let r = fit_log_log(&x, &y, 1.0, 0.1).unwrap();
        assert!((r.slope - 0.5).abs() < 1e-12);
        assert!((r.d_hat - 2.0).abs() < 1e-12);
        assert!((r.intercept - 7f64.ln()).abs() < 1e-12);
        assert!(r.ci_high - r.ci_low < 1e-12);
        assert!(r.admissible);
    }

    #[test]
    fn admissibility_reasons() {
        let x: Vec<f64> = [100.0f64, 200.0, 400.0, 800.0, 1600.0].iter().map(|m| m.ln()).collect();
        // β = 0.5 with alpha = 3 → d̂ = 6 > α: fine; alpha = 3 with β = -0.5 → d̂ = 2 < α.
        let y: Vec<f64> = x.iter().map(|v| 1.0 - 0.5 * v).collect();
        assert_eq!(fit_log_log(&x, &y, 3.0, 0.1).unwrap().rejection_reason, RejectionReason::AlphaGeDhat);
        // Slope above one.
        let y: Vec<f64> = x.iter().map(|v| 1.0 + 1.2 * v).collect();
        let r = fit_log_log(&x, &y, 1.0, 0.1).unwrap();
        assert_eq!(r.rejection_reason, RejectionReason::SlopeGeOne);
        assert!(r.d_hat.is_nan());
        // Noisy data: a wide band.
        let y = [1.0, 3.0, 0.5, 4.0, 2.0];
        let r = fit_log_log(&x, &y, 1.0, 0.1).unwrap();
        assert_eq!(r.rejection_reason, RejectionReason::LineCi);
        assert!(!r.admissible);
    }

    #[test]
    fn degenerate_inputs() {
        let x: Vec<f64> = (1..=5).map(|v| f64::from(v).ln()).collect();
        let y = [1.0, 2.0, f64::NEG_INFINITY, 3.0, 4.0];
        assert!(matches!(fit_log_log(&x, &y, 1.0, 0.1), Err(Error::DegenerateFit { .. })));
        assert!(fit_log_log(&x, &[1.0, 2.0, 3.0, 4.0, 5.0], 1.0, 1.5).is_err());
        assert!(fit_log_log(&x, &[1.0, 2.0, 3.0, 4.0, 5.0], 0.0, 0.1).is_err());
    }

    #[test]
    fn log_power_sum_is_stable() {
        let w = [1e-200, 2e-200, 0.0];
        let direct = ((1e-200f64).ln() * 3.0).exp();
        assert_eq!(direct, 0.0);
        let l = log_power_sum(&w, 3.0);
        let expected = 3.0 * (1e-200f64).ln() + (1.0f64 + 8.0).ln();
        assert!((l - expected).abs() < 1e-9);
        assert_eq!(log_power_sum(&[0.0, 0.0], 2.0), f64::NEG_INFINITY);
        assert!((log_power_sum(&[2.0, 3.0], 2.0) - 13f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn all_duplicate_points_degenerate_in_sweep() {
        let c = PointCloud::new(vec![0.5; 200], 2, CloudMeta::new("dup")).unwrap();
        let sched = SizeSchedule::new(vec![10, 20, 40, 60, 100], 1).unwrap();
        let grid = AlphaGrid { start: 1.0, stop: 2.0, step: 1.0 };
        let rep = sweep_alpha(&c, grid, &sched, 0.1, Seed(1)).unwrap();
        assert!(rep.records.iter().all(|r| r.rejection_reason == RejectionReason::Degenerate));
        assert!(rep.d_min.is_none());
        assert!(rep.admissible_alpha.is_empty());
        let json = serde_json::to_string(&rep).unwrap();
        assert!(json.contains("\"admissible\":[]"));
        assert!(matches!(fit_dimension(&c, 1.0, &sched, 0.1, Seed(1)), Err(Error::DegenerateFit { .. })));
    }

    #[test]
    fn sweep_matches_single_fits_and_scale_leaves_slope() {
        let c = sample_manifold(&ManifoldSpec::UnitCube { dim: 2 }, 3000, Seed(4)).unwrap();
        let sched = schedule_sizes(3000, 300, 6).unwrap();
        let grid = AlphaGrid { start: 0.5, stop: 1.5, step: 0.5 };
        let rep = sweep_alpha(&c, grid, &sched, 0.1, Seed(9)).unwrap();
        for r in &rep.records {
            let single = fit_dimension(&c, r.alpha, &sched, 0.1, Seed(9)).unwrap();
            assert_eq!(&single, r);
        }
        let scaled = c.scaled(7.5).unwrap();
        let rep2 = sweep_alpha(&scaled, grid, &sched, 0.1, Seed(9)).unwrap();
        for (a, b) in rep.records.iter().zip(&rep2.records) {
            assert!((a.slope - b.slope).abs() < 1e-9);
            assert!((a.intercept + a.alpha * 7.5f64.ln() - b.intercept).abs() < 1e-9);
            assert_eq!(a.admissible, b.admissible);
        }
        assert!(rep.d_min.unwrap() > 1.7 && rep.d_max.unwrap() < 2.3, "{:?}", rep.d_min);
    }

    #[test]
    fn report_round_trips_and_writes_csv() {
        let x: Vec<f64> = [10.0f64, 20.0, 40.0, 80.0, 160.0].iter().map(|m| m.ln()).collect();
        let records: Vec<FitRecord> = [0.5, 1.0, 1.5, 5.0]
            .iter()
            .map(|&a| {
                let y: Vec<f64> = x.iter().map(|v| (1.0 - a / 2.0) * v).collect();
                fit_log_log(&x, &y, a, 0.1).unwrap()
            })
            .collect();
        let sched = SizeSchedule::new(vec![10, 20, 40, 80, 160], 1).unwrap();
        let rep = SchweinhartReport::from_records(records, AlphaGrid::default(), 0.1, 160, sched, Seed(1));
        assert_eq!(rep.admissible_alpha, vec![[0.5, 1.5]]);
        assert!((rep.d_min.unwrap() - 2.0).abs() < 1e-12);
        let json = serde_json::to_string(&rep).unwrap();
        let back: SchweinhartReport = serde_json::from_str(&json).unwrap();
        assert_eq!(serde_json::to_string(&back).unwrap(), json);
        let mut csv = Vec::new();
        rep.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert_eq!(text.lines().next(), Some("alpha,d_hat,ci_low,ci_high,admissible"));
        assert_eq!(text.lines().count(), 5);
    }
}
