//! Samplers for the synthetic objects used to validate the estimators:
//! manifolds sampled uniformly by surface area, self-similar fractals drawn
//! with the chaos game, and the graph of a lognormal dyadic cascade.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::cloud::{CloudMeta, PointCloud};
use crate::error::{Error, Result};
use crate::rng::{Seed, StreamRng};

/// Swiss roll angle range `[1.5π, 4.5π]` and height `[0, 21]`.
pub const SWISS_ROLL_T: (f64, f64) = (1.5 * PI, 4.5 * PI);
pub const SWISS_ROLL_HEIGHT: f64 = 21.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ManifoldSpec {
    /// `[0,1]^dim`.
    UnitCube { dim: usize },
    /// The unit sphere `S^dim` in `R^(dim+1)`.
    UnitSphere { dim: usize },
    /// `S^dim` with points concentrated around the two poles of the last
    /// axis: ambient Gaussians of standard deviation `sd` centred on `±e`,
    /// the north pole chosen with probability `weight`, projected radially.
    UnitSphereGaussianMix { dim: usize, sd: f64, weight: f64 },
    /// `((1 + (v/2)cos(u/2))cos u, (1 + (v/2)cos(u/2))sin u, (v/2)sin(u/2))`,
    /// `u ∈ [0, 2π)`, `v ∈ [-1, 1]`.
    MobiusStrip,
    /// `(t cos t, y, t sin t)`, `t ∈ [1.5π, 4.5π]`, `y ∈ [0, 21]`.
    SwissRoll,
    /// `z = x² + y²` over the unit disk.
    Paraboloid,
}

impl ManifoldSpec {
    pub fn gaussian_mix(dim: usize) -> Self {
        ManifoldSpec::UnitSphereGaussianMix { dim, sd: 0.5, weight: 0.5 }
    }

    pub fn intrinsic_dim(&self) -> usize {
        match *self {
            ManifoldSpec::UnitCube { dim }
            | ManifoldSpec::UnitSphere { dim }
            | ManifoldSpec::UnitSphereGaussianMix { dim, .. } => dim,
            _ => 2,
        }
    }

    pub fn ambient_dim(&self) -> usize {
        match *self {
            ManifoldSpec::UnitCube { dim } => dim,
            ManifoldSpec::UnitSphere { dim } | ManifoldSpec::UnitSphereGaussianMix { dim, .. } => dim + 1,
            _ => 3,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ManifoldSpec::UnitCube { .. } => "unit-cube",
            ManifoldSpec::UnitSphere { .. } => "unit-sphere",
            ManifoldSpec::UnitSphereGaussianMix { .. } => "unit-sphere-gauss-mix",
            ManifoldSpec::MobiusStrip => "mobius-strip",
            ManifoldSpec::SwissRoll => "swiss-roll",
            ManifoldSpec::Paraboloid => "paraboloid",
        }
    }

    fn validate(&self) -> Result<()> {
        if self.intrinsic_dim() == 0 {
            return Err(Error::invalid("intrinsic dimension must be at least 1"));
        }
        if let ManifoldSpec::UnitSphereGaussianMix { sd, weight, .. } = *self {
            if !(sd > 0.0 && sd.is_finite()) || !(0.0..=1.0).contains(&weight) {
                return Err(Error::invalid(format!(
                    "gaussian mix needs sd > 0 and weight in [0,1], got sd={sd}, weight={weight}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FractalKind {
    SierpinskiTriangle,
    SierpinskiCarpet,
    MengerSponge,
}

impl FractalKind {
    /// Similarity dimension of the attractor.
    pub fn hausdorff_dim(self) -> f64 {
        match self {
            FractalKind::SierpinskiTriangle => 3f64.ln() / 2f64.ln(),
            FractalKind::SierpinskiCarpet => 8f64.ln() / 3f64.ln(),
            FractalKind::MengerSponge => 20f64.ln() / 3f64.ln(),
        }
    }

    pub fn ambient_dim(self) -> usize {
        match self {
            FractalKind::MengerSponge => 3,
            _ => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FractalKind::SierpinskiTriangle => "sierpinski-triangle",
            FractalKind::SierpinskiCarpet => "sierpinski-carpet",
            FractalKind::MengerSponge => "menger-sponge",
        }
    }

    /// Contraction ratio and the translations of the IFS maps
    /// `x -> ratio * (x + offset)`.
    fn maps(self) -> (f64, Vec<Vec<f64>>) {
        match self {
            FractalKind::SierpinskiTriangle => {
                (0.5, vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.5, 3f64.sqrt() / 2.0]])
            }
            FractalKind::SierpinskiCarpet => {
                let mut offsets = Vec::new();
                for i in 0..3 {
                    for j in 0..3 {
                        if (i, j) != (1, 1) {
                            offsets.push(vec![i as f64, j as f64]);
                        }
                    }
                }
                (1.0 / 3.0, offsets)
            }
            FractalKind::MengerSponge => {
                let mut offsets = Vec::new();
                for i in 0..3 {
                    for j in 0..3 {
                        for k in 0..3 {
                            let middles = [i, j, k].iter().filter(|&&c| c == 1).count();
                            if middles <= 1 {
                                offsets.push(vec![i as f64, j as f64, k as f64]);
                            }
                        }
                    }
                }
                (1.0 / 3.0, offsets)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FractalSpec {
    pub kind: FractalKind,
    pub burn_in: usize,
}

impl FractalSpec {
    pub fn new(kind: FractalKind) -> Self {
        FractalSpec { kind, burn_in: 100 }
    }
}

/// Dyadic multiplicative cascade with lognormal weights
/// `exp(log_mean + log_sd * Z)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CascadeSpec {
    pub levels: u32,
    pub log_mean: f64,
    pub log_sd: f64,
}

impl CascadeSpec {
    /// Weights with mean 1/2, so that the expected leaf mass is `2^-levels`.
    pub fn with_sd(levels: u32, log_sd: f64) -> Self {
        Self::with_mean_multiplier(levels, 0.5, log_sd)
    }

    /// Weights with the given mean; the expected leaf mass is
    /// `mean^levels`.
    pub fn with_mean_multiplier(levels: u32, mean: f64, log_sd: f64) -> Self {
        CascadeSpec { levels, log_mean: mean.ln() - 0.5 * log_sd * log_sd, log_sd }
    }
}

impl Default for CascadeSpec {
    fn default() -> Self {
        CascadeSpec::with_sd(17, 0.3)
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::invalid("sample size must be at least 1"))
    } else {
        Ok(())
    }
}

fn gaussian_vec(rng: &mut StreamRng, k: usize) -> Vec<f64> {
    (0..k).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

fn normalize(x: &mut [f64]) -> bool {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm < 1e-12 {
        return false;
    }
    x.iter_mut().for_each(|v| *v /= norm);
    true
}

/// Draws from a density proportional to `weight` on a parameter box by
/// rejection against the uniform proposal.
fn rejection<P, W>(rng: &mut StreamRng, mut propose: P, weight: W, max_weight: f64) -> (f64, f64)
where
    P: FnMut(&mut StreamRng) -> Option<(f64, f64)>,
    W: Fn(f64, f64) -> f64,
{
    loop {
        let Some((a, b)) = propose(rng) else { continue };
        if rng.random::<f64>() * max_weight < weight(a, b) {
            return (a, b);
        }
    }
}

/// Area element of the Möbius parameterization at `(u, v)`.
pub(crate) fn mobius_area(u: f64, v: f64) -> f64 {
    let w = v / 2.0;
    0.5 * ((1.0 + w * (u / 2.0).cos()).powi(2) + w * w / 4.0).sqrt()
}

pub(crate) fn mobius_params(rng: &mut StreamRng) -> (f64, f64) {
    let max = mobius_area(0.0, 1.0);
    rejection(rng, |r| Some((r.random::<f64>() * 2.0 * PI, r.random::<f64>() * 2.0 - 1.0)), mobius_area, max)
}

pub(crate) fn swiss_roll_params(rng: &mut StreamRng) -> (f64, f64) {
    let (t0, t1) = SWISS_ROLL_T;
    let max = (1.0 + t1 * t1).sqrt();
    rejection(
        rng,
        |r| Some((t0 + (t1 - t0) * r.random::<f64>(), SWISS_ROLL_HEIGHT * r.random::<f64>())),
        |t, _| (1.0 + t * t).sqrt(),
        max,
    )
}

fn paraboloid_params(rng: &mut StreamRng) -> (f64, f64) {
    rejection(
        rng,
        |r| {
            let x = 2.0 * r.random::<f64>() - 1.0;
            let y = 2.0 * r.random::<f64>() - 1.0;
            (x * x + y * y <= 1.0).then_some((x, y))
        },
        |x, y| (1.0 + 4.0 * (x * x + y * y)).sqrt(),
        5f64.sqrt(),
    )
}

pub fn sample_manifold(spec: &ManifoldSpec, n: usize, seed: Seed) -> Result<PointCloud> {
    check_n(n)?;
    spec.validate()?;
    let mut rng = seed.stream("manifold", &[]);
    let d = spec.ambient_dim();
    let mut pts = Vec::with_capacity(n * d);
    for _ in 0..n {
        match *spec {
            ManifoldSpec::UnitCube { dim } => pts.extend((0..dim).map(|_| rng.random::<f64>())),
            ManifoldSpec::UnitSphere { dim } => loop {
                let mut x = gaussian_vec(&mut rng, dim + 1);
                if normalize(&mut x) {
                    pts.extend(x);
                    break;
                }
            },
            ManifoldSpec::UnitSphereGaussianMix { dim, sd, weight } => loop {
                let pole = if rng.random::<f64>() < weight { 1.0 } else { -1.0 };
                let mut x: Vec<f64> = gaussian_vec(&mut rng, dim + 1).into_iter().map(|z| sd * z).collect();
                x[dim] += pole;
                if normalize(&mut x) {
                    pts.extend(x);
                    break;
                }
            },
            ManifoldSpec::MobiusStrip => {
                let (u, v) = mobius_params(&mut rng);
                let w = v / 2.0;
                let r = 1.0 + w * (u / 2.0).cos();
                pts.extend([r * u.cos(), r * u.sin(), w * (u / 2.0).sin()]);
            }
            ManifoldSpec::SwissRoll => {
                let (t, y) = swiss_roll_params(&mut rng);
                pts.extend([t * t.cos(), y, t * t.sin()]);
            }
            ManifoldSpec::Paraboloid => {
                let (x, y) = paraboloid_params(&mut rng);
                pts.extend([x, y, x * x + y * y]);
            }
        }
    }
    let meta = CloudMeta::new(spec.name())
        .with_param("intrinsic_dim", spec.intrinsic_dim())
        .with_param("n", n)
        .with_seed(seed);
    PointCloud::new(pts, d, meta)
}

/// Chaos-game sample of a self-similar fractal. The first `burn_in` iterates
/// are discarded; the rest lie in the unit square (cube).
pub fn sample_ifs_fractal(spec: &FractalSpec, n: usize, seed: Seed) -> Result<PointCloud> {
    check_n(n)?;
    let (ratio, offsets) = spec.kind.maps();
    let d = spec.kind.ambient_dim();
    let mut rng = seed.stream("chaos-game", &[]);
    let mut x: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
    let mut pts = Vec::with_capacity(n * d);
    for step in 0..spec.burn_in + n {
        let off = &offsets[rng.random_range(0..offsets.len())];
        for k in 0..d {
            x[k] = ratio * (x[k] + off[k]);
        }
        if step >= spec.burn_in {
            pts.extend_from_slice(&x);
        }
    }
    let meta = CloudMeta::new(spec.kind.name()).with_param("burn_in", spec.burn_in).with_param("n", n).with_seed(seed);
    PointCloud::new(pts, d, meta)
}

/// Leaf masses of the cascade: unit root mass, each child's mass is its
/// parent's times an independent lognormal weight. Weights are drawn level by
/// level, left to right.
pub fn lognormal_cascade_masses(spec: &CascadeSpec, seed: Seed) -> Result<Vec<f64>> {
    if !(1..=24).contains(&spec.levels) {
        return Err(Error::invalid(format!("cascade levels must lie in 1..=24, got {}", spec.levels)));
    }
    if !spec.log_mean.is_finite() || !(spec.log_sd >= 0.0 && spec.log_sd.is_finite()) {
        return Err(Error::invalid("cascade needs a finite log_mean and log_sd >= 0"));
    }
    let mut rng = seed.stream("lognormal-cascade", &[]);
    let mut masses = vec![1.0f64];
    for _ in 0..spec.levels {
        let mut next = Vec::with_capacity(masses.len() * 2);
        for &m in &masses {
            for _ in 0..2 {
                let z: f64 = rng.sample(StandardNormal);
                next.push(m * (spec.log_mean + spec.log_sd * z).exp());
            }
        }
        masses = next;
    }
    Ok(masses)
}

/// The cascade as a 2-D cloud `{(k / 2^J, X_k)}`.
pub fn sample_lognormal_cascade(spec: &CascadeSpec, seed: Seed) -> Result<PointCloud> {
    let masses = lognormal_cascade_masses(spec, seed)?;
    let len = masses.len() as f64;
    let pts = masses.iter().enumerate().flat_map(|(k, &m)| [k as f64 / len, m]).collect();
    let meta = CloudMeta::new("lognormal-cascade")
        .with_param("levels", spec.levels)
        .with_param("log_mean", spec.log_mean)
        .with_param("log_sd", spec.log_sd)
        .with_seed(seed);
    PointCloud::new(pts, 2, meta)
}
