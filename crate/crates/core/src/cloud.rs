//! The point-cloud container and the transforms shared by every estimator:
//! dimension lifting, coordinate noise, uniform background points and
//! subsampling.

use std::collections::{BTreeMap, HashSet};
use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Seed;

/// Provenance of a cloud: where it came from and what was done to it.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CloudMeta {
    pub generator: String,
    pub params: BTreeMap<String, String>,
    pub seed: Option<u64>,
    /// Transforms applied after generation, oldest first.
    pub history: Vec<String>,
}

impl CloudMeta {
    pub fn new(generator: impl Into<String>) -> Self {
        CloudMeta { generator: generator.into(), ..Default::default() }
    }

    pub fn with_param(mut self, key: &str, value: impl ToString) -> Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }

    pub fn with_seed(mut self, seed: Seed) -> Self {
        self.seed = Some(seed.value());
        self
    }
}

/// `n` points in `R^d`, stored row-major. All coordinates are finite.
#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud {
    n: usize,
    d: usize,
    points: Vec<f64>,
    pub meta: CloudMeta,
}

impl PointCloud {
    pub fn new(points: Vec<f64>, d: usize, meta: CloudMeta) -> Result<Self> {
        if d == 0 {
            return Err(Error::invalid("point dimension must be at least 1"));
        }
        if points.is_empty() || points.len() % d != 0 {
            return Err(Error::invalid(format!(
                "coordinate buffer of length {} does not hold a whole, nonzero number of {d}-dimensional points",
                points.len()
            )));
        }
        if let Some(pos) = points.iter().position(|x| !x.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite coordinate {} at point {}, axis {}",
                points[pos],
                pos / d,
                pos % d
            )));
        }
        Ok(PointCloud { n: points.len() / d, d, points, meta })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R], meta: CloudMeta) -> Result<Self> {
        let d = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        if rows.iter().any(|r| r.as_ref().len() != d) {
            return Err(Error::invalid("rows have differing lengths"));
        }
        let points = rows.iter().flat_map(|r| r.as_ref().iter().copied()).collect();
        Self::new(points, d, meta)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.points[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.points.chunks_exact(self.d)
    }

    /// Row-major coordinate buffer.
    pub fn as_slice(&self) -> &[f64] {
        &self.points
    }

    /// Tightest axis-aligned box `(lo, hi)` containing every point.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let mut lo = self.row(0).to_vec();
        let mut hi = lo.clone();
        for r in self.rows() {
            for k in 0..self.d {
                lo[k] = lo[k].min(r[k]);
                hi[k] = hi[k].max(r[k]);
            }
        }
        (lo, hi)
    }

    /// Multiplies every coordinate by `s`.
    pub fn scaled(&self, s: f64) -> Result<PointCloud> {
        let mut meta = self.meta.clone();
        meta.history.push(format!("scale(s={s})"));
        PointCloud::new(self.points.iter().map(|x| x * s).collect(), self.d, meta)
    }

    /// Drops exact duplicate points, keeping first occurrences in order.
    pub fn deduplicated(&self) -> PointCloud {
        let mut seen = HashSet::with_capacity(self.n);
        let mut points = Vec::with_capacity(self.points.len());
        for r in self.rows() {
            // +0.0 and -0.0 are the same point.
            let key: Vec<u64> = r.iter().map(|x| (x + 0.0).to_bits()).collect();
            if seen.insert(key) {
                points.extend_from_slice(r);
            }
        }
        let mut meta = self.meta.clone();
        meta.history.push("dedup".to_string());
        PointCloud { n: points.len() / self.d, d: self.d, points, meta }
    }

    fn with_points(&self, points: Vec<f64>, d: usize, step: String) -> Result<PointCloud> {
        let mut meta = self.meta.clone();
        meta.history.push(step);
        PointCloud::new(points, d, meta)
    }
}

/// How extra coordinates are synthesised when lifting a cloud into a
/// higher-dimensional space.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LiftScheme {
    /// Appended coordinate `k` is `f_{k mod 4}(x_{k mod d})` with the cycle
    /// `sin(πx), x², cos(πx), x³`.
    #[default]
    PolyPeriodic,
}

impl LiftScheme {
    fn apply(self, k: usize, x: f64) -> f64 {
        match self {
            LiftScheme::PolyPeriodic => match k % 4 {
                0 => (PI * x).sin(),
                1 => x * x,
                2 => (PI * x).cos(),
                _ => x * x * x,
            },
        }
    }
}

/// Embeds the cloud in `R^target_d` by appending smooth functions of the
/// existing coordinates. The original coordinates are left untouched, so the
/// result is the graph of a smooth map and keeps the intrinsic dimension.
pub fn lift_dimension(cloud: &PointCloud, target_d: usize, scheme: LiftScheme) -> Result<PointCloud> {
    let d = cloud.d();
    if target_d <= d {
        return Err(Error::invalid(format!("target dimension {target_d} must exceed the current dimension {d}")));
    }
    let mut points = Vec::with_capacity(cloud.n() * target_d);
    for r in cloud.rows() {
        points.extend_from_slice(r);
        points.extend((0..target_d - d).map(|k| scheme.apply(k, r[k % d])));
    }
    cloud.with_points(points, target_d, format!("lift(target_d={target_d},scheme={scheme:?})"))
}

/// Adds independent `Normal(0, sigma²)` noise to every coordinate.
pub fn add_gaussian_noise(cloud: &PointCloud, sigma: f64, seed: Seed) -> Result<PointCloud> {
    if !sigma.is_finite() || sigma < 0.0 {
        return Err(Error::invalid(format!("noise sigma must be finite and >= 0, got {sigma}")));
    }
    if sigma == 0.0 {
        return Ok(cloud.clone());
    }
    let mut rng = seed.stream("gaussian-noise", &[]);
    let points = cloud.as_slice().iter().map(|&x| x + sigma * rng.sample::<f64, _>(StandardNormal)).collect();
    cloud.with_points(points, cloud.d(), format!("gaussian_noise(sigma={sigma},seed={})", seed.value()))
}

/// Appends `round(fraction * n)` points drawn uniformly from the bounding box
/// of the cloud.
pub fn add_uniform_background(cloud: &PointCloud, fraction: f64, seed: Seed) -> Result<PointCloud> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::invalid(format!("background fraction must lie in [0, 1], got {fraction}")));
    }
    let extra = (fraction * cloud.n() as f64).round() as usize;
    if extra == 0 {
        return Ok(cloud.clone());
    }
    let (lo, hi) = cloud.bounding_box();
    let mut rng = seed.stream("uniform-background", &[]);
    let mut points = cloud.as_slice().to_vec();
    points.reserve(extra * cloud.d());
    for _ in 0..extra {
        for k in 0..cloud.d() {
            let u: f64 = rng.random();
            points.push((lo[k] + (hi[k] - lo[k]) * u).min(hi[k]));
        }
    }
    cloud.with_points(
        points,
        cloud.d(),
        format!("uniform_background(fraction={fraction},added={extra},seed={})", seed.value()),
    )
}

/// Draws `m` distinct points uniformly without replacement.
pub fn subsample(cloud: &PointCloud, m: usize, seed: Seed) -> Result<PointCloud> {
    subsample_stream(cloud, m, seed, "subsample", &[])
}

/// [`subsample`] on an explicitly labelled random stream, so callers drawing
/// many subsamples from one seed get independent draws.
pub(crate) fn subsample_stream(
    cloud: &PointCloud,
    m: usize,
    seed: Seed,
    label: &str,
    coords: &[u64],
) -> Result<PointCloud> {
    if m == 0 || m > cloud.n() {
        return Err(Error::invalid(format!("subsample size {m} outside 1..={}", cloud.n())));
    }
    let mut rng = seed.stream(label, coords);
    let idx = rand::seq::index::sample(&mut rng, cloud.n(), m);
    let mut points = Vec::with_capacity(m * cloud.d());
    for i in idx.iter() {
        points.extend_from_slice(cloud.row(i));
    }
    cloud.with_points(points, cloud.d(), format!("subsample(m={m},seed={})", seed.value()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn cloud(rows: &[&[f64]]) -> PointCloud {
        PointCloud::from_rows(rows, CloudMeta::new("test")).unwrap()
    }

    fn random_cloud(n: usize, d: usize, seed: u64) -> PointCloud {
        let mut rng = Seed(seed).stream("test-cloud", &[]);
        let pts = (0..n * d).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect();
        PointCloud::new(pts, d, CloudMeta::new("test")).unwrap()
    }

    #[test]
    fn rejects_bad_buffers() {
        assert!(PointCloud::new(vec![], 2, CloudMeta::default()).is_err());
        assert!(PointCloud::new(vec![1.0, 2.0, 3.0], 2, CloudMeta::default()).is_err());
        assert!(PointCloud::new(vec![1.0, f64::NAN], 2, CloudMeta::default()).is_err());
        assert!(PointCloud::new(vec![1.0, f64::INFINITY], 1, CloudMeta::default()).is_err());
        assert!(PointCloud::new(vec![1.0], 0, CloudMeta::default()).is_err());
    }

    #[test]
    fn lift_zero_point() {
        let c = cloud(&[&[0.0, 0.0]]);
        let l = lift_dimension(&c, 4, LiftScheme::PolyPeriodic).unwrap();
        assert_eq!(l.d(), 4);
        assert_eq!(l.row(0), &[0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn lift_half() {
        let c = cloud(&[&[0.5]]);
        let l = lift_dimension(&c, 3, LiftScheme::PolyPeriodic).unwrap();
        assert_eq!(l.row(0)[0], 0.5);
        assert!((l.row(0)[1] - 1.0).abs() < 1e-15);
        assert_eq!(l.row(0)[2], 0.25);
    }

    #[test]
    fn lift_cycles_functions_and_coordinates() {
        let c = cloud(&[&[0.25, -0.5, 2.0]]);
        let l = lift_dimension(&c, 9, LiftScheme::PolyPeriodic).unwrap();
        let x = [0.25f64, -0.5, 2.0];
        let expected =
            [(PI * x[0]).sin(), x[1] * x[1], (PI * x[2]).cos(), x[0].powi(3), (PI * x[1]).sin(), x[2] * x[2]];
        assert_eq!(&l.row(0)[..3], &x);
        for (a, b) in l.row(0)[3..].iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(l.meta.history.len(), 1);
    }

    #[test]
    fn lift_requires_larger_target() {
        let c = cloud(&[&[0.0, 1.0]]);
        assert!(matches!(lift_dimension(&c, 2, LiftScheme::PolyPeriodic), Err(Error::InvalidArgument(_))));
        assert!(lift_dimension(&c, 1, LiftScheme::PolyPeriodic).is_err());
    }

    #[test]
    fn zero_noise_is_identity() {
        let c = random_cloud(50, 3, 1);
        assert_eq!(add_gaussian_noise(&c, 0.0, Seed(3)).unwrap().as_slice(), c.as_slice());
        assert_eq!(add_uniform_background(&c, 0.0, Seed(3)).unwrap().as_slice(), c.as_slice());
    }

    #[test]
    fn noise_validates_arguments() {
        let c = random_cloud(5, 2, 1);
        assert!(add_gaussian_noise(&c, -0.1, Seed(1)).is_err());
        assert!(add_gaussian_noise(&c, f64::NAN, Seed(1)).is_err());
        assert!(add_uniform_background(&c, 1.5, Seed(1)).is_err());
        assert!(add_uniform_background(&c, -0.01, Seed(1)).is_err());
    }

    #[test]
    fn gaussian_noise_is_seeded() {
        let c = random_cloud(100, 3, 2);
        let a = add_gaussian_noise(&c, 0.1, Seed(5)).unwrap();
        let b = add_gaussian_noise(&c, 0.1, Seed(5)).unwrap();
        let other = add_gaussian_noise(&c, 0.1, Seed(6)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.as_slice(), other.as_slice());
        assert_eq!((a.n(), a.d()), (100, 3));
        // Sample variance of the perturbation is close to sigma².
        let diffs: Vec<f64> = a.as_slice().iter().zip(c.as_slice()).map(|(x, y)| x - y).collect();
        let var = diffs.iter().map(|x| x * x).sum::<f64>() / diffs.len() as f64;
        assert!((var - 0.01).abs() < 0.003, "variance {var}");
    }

    #[test]
    fn background_adds_points_inside_box() {
        let c = random_cloud(100, 3, 4);
        let out = add_uniform_background(&c, 0.05, Seed(9)).unwrap();
        assert_eq!(out.n(), 105);
        assert_eq!(&out.as_slice()[..300], c.as_slice());
        let (lo, hi) = c.bounding_box();
        for r in out.rows().skip(100) {
            for k in 0..3 {
                assert!(r[k] >= lo[k] && r[k] <= hi[k]);
            }
        }
    }

    #[test]
    fn subsample_edges() {
        let c = random_cloud(40, 2, 3);
        assert!(subsample(&c, 0, Seed(1)).is_err());
        assert!(subsample(&c, 41, Seed(1)).is_err());
        let one = subsample(&c, 1, Seed(1)).unwrap();
        assert_eq!(one.n(), 1);
        assert!(c.rows().any(|r| r == one.row(0)));

        let all = subsample(&c, 40, Seed(2)).unwrap();
        let mut a: Vec<Vec<u64>> = all.rows().map(|r| r.iter().map(|x| x.to_bits()).collect()).collect();
        let mut b: Vec<Vec<u64>> = c.rows().map(|r| r.iter().map(|x| x.to_bits()).collect()).collect();
        a.sort();
        b.sort();
        assert_eq!(a, b);

        assert_eq!(subsample(&c, 20, Seed(8)).unwrap(), subsample(&c, 20, Seed(8)).unwrap());
    }

    #[test]
    fn dedup_keeps_first_occurrences() {
        let c = cloud(&[&[1.0, 2.0], &[0.0, 0.0], &[1.0, 2.0], &[-0.0, 0.0]]);
        let u = c.deduplicated();
        assert_eq!(u.n(), 2);
        assert_eq!(u.row(0), &[1.0, 2.0]);
    }

    proptest! {
        #[test]
        fn subsample_is_sub_multiset(n in 1usize..60, frac in 0.0f64..1.0, seed in any::<u64>()) {
            let c = random_cloud(n, 2, seed);
            let m = ((n as f64 * frac) as usize).max(1);
            let s = subsample(&c, m, Seed(seed)).unwrap();
            let mut pool: Vec<Vec<u64>> = c.rows().map(|r| r.iter().map(|x| x.to_bits()).collect()).collect();
            for r in s.rows() {
                let key: Vec<u64> = r.iter().map(|x| x.to_bits()).collect();
                let pos = pool.iter().position(|p| *p == key);
                prop_assert!(pos.is_some());
                pool.swap_remove(pos.unwrap());
            }
        }

        #[test]
        fn lift_preserves_prefix(n in 1usize..20, d in 1usize..5, extra in 1usize..9, seed in any::<u64>()) {
            let c = random_cloud(n, d, seed);
            let l = lift_dimension(&c, d + extra, LiftScheme::PolyPeriodic).unwrap();
            prop_assert_eq!(l.d(), d + extra);
            for i in 0..n {
                prop_assert_eq!(&l.row(i)[..d], c.row(i));
            }
        }
    }
}
