use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::{Args, ValueEnum};
use dimscope::cloud::{add_gaussian_noise, add_uniform_background, lift_dimension};
use dimscope::geometry::{
    sample_ifs_fractal, sample_lognormal_cascade, sample_manifold, CascadeSpec, FractalKind, FractalSpec, ManifoldSpec,
};
use dimscope::io::{write_cloud, CloudFormat};
use dimscope::{LiftScheme, PointCloud, Seed};
use serde::Serialize;

use super::{cloud_format, parse_format, Context};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Object {
    UnitCube,
    UnitSphere,
    UnitSphereGaussMix,
    MobiusStrip,
    SwissRoll,
    Paraboloid,
    SierpinskiTriangle,
    SierpinskiCarpet,
    MengerSponge,
    LognormalCascade,
}

#[derive(Args, Debug, Serialize)]
pub struct SampleArgs {
    #[arg(long, value_enum)]
    object: Object,
    /// Number of points (ignored by the cascade, which has 2^levels).
    #[arg(long, default_value_t = 100_000)]
    n: usize,
    /// Dimension of the cube or sphere family (cube 3, spheres 2 by default).
    #[arg(long)]
    intrinsic_dim: Option<usize>,
    /// Lift the sample into this many coordinates.
    #[arg(long)]
    d_target: Option<usize>,
    /// Standard deviation of per-coordinate Gaussian noise.
    #[arg(long, default_value_t = 0.0)]
    noise_gauss: f64,
    /// Append this fraction of uniform points from the bounding box.
    #[arg(long, default_value_t = 0.0)]
    noise_uniform_frac: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// csv or bin; inferred from the extension of --out when absent.
    #[arg(long, value_parser = parse_format)]
    format: Option<CloudFormat>,
    /// Chaos-game iterations discarded before recording points.
    #[arg(long, default_value_t = 100)]
    burn_in: usize,
    #[arg(long, default_value_t = 0.5)]
    mix_sd: f64,
    /// Probability of the north-pole component.
    #[arg(long, default_value_t = 0.5)]
    mix_weight: f64,
    #[arg(long, default_value_t = 17)]
    cascade_levels: u32,
    /// Standard deviation of the log multipliers.
    #[arg(long, default_value_t = 0.3)]
    cascade_sd: f64,
    /// Mean of each multiplier.
    #[arg(long, default_value_t = 0.5)]
    cascade_mean: f64,
}

fn generate(a: &SampleArgs, seed: Seed) -> Result<PointCloud> {
    let fixed_two = |name: &str| -> Result<()> {
        match a.intrinsic_dim {
            Some(k) if k != 2 => bail!("{name} is two-dimensional; --intrinsic-dim {k} is not available"),
            _ => Ok(()),
        }
    };
    let no_dim = |name: &str| -> Result<()> {
        if a.intrinsic_dim.is_some() {
            bail!("--intrinsic-dim does not apply to {name}");
        }
        Ok(())
    };
    let manifold = |spec: ManifoldSpec| -> Result<PointCloud> { Ok(sample_manifold(&spec, a.n, seed)?) };
    let fractal = |kind: FractalKind| -> Result<PointCloud> {
        no_dim(kind.name())?;
        Ok(sample_ifs_fractal(&FractalSpec { kind, burn_in: a.burn_in }, a.n, seed)?)
    };
    match a.object {
        Object::UnitCube => manifold(ManifoldSpec::UnitCube { dim: a.intrinsic_dim.unwrap_or(3) }),
        Object::UnitSphere => manifold(ManifoldSpec::UnitSphere { dim: a.intrinsic_dim.unwrap_or(2) }),
        Object::UnitSphereGaussMix => manifold(ManifoldSpec::UnitSphereGaussianMix {
            dim: a.intrinsic_dim.unwrap_or(2),
            sd: a.mix_sd,
            weight: a.mix_weight,
        }),
        Object::MobiusStrip => {
            fixed_two("mobius-strip")?;
            manifold(ManifoldSpec::MobiusStrip)
        }
        Object::SwissRoll => {
            fixed_two("swiss-roll")?;
            manifold(ManifoldSpec::SwissRoll)
        }
        Object::Paraboloid => {
            fixed_two("paraboloid")?;
            manifold(ManifoldSpec::Paraboloid)
        }
        Object::SierpinskiTriangle => fractal(FractalKind::SierpinskiTriangle),
        Object::SierpinskiCarpet => fractal(FractalKind::SierpinskiCarpet),
        Object::MengerSponge => fractal(FractalKind::MengerSponge),
        Object::LognormalCascade => {
            no_dim("lognormal-cascade")?;
            if !(a.cascade_mean > 0.0) {
                bail!("--cascade-mean must be positive, got {}", a.cascade_mean);
            }
            let spec = CascadeSpec::with_mean_multiplier(a.cascade_levels, a.cascade_mean, a.cascade_sd);
            Ok(sample_lognormal_cascade(&spec, seed)?)
        }
    }
}

pub fn run(ctx: &Context, a: SampleArgs) -> Result<()> {
    let mut run = ctx.run("sample", &a)?;
    run.seed("seed", a.seed);
    let seed = Seed::new(a.seed);
    let mut cloud = generate(&a, seed)?;
    if let Some(d) = a.d_target {
        cloud = lift_dimension(&cloud, d, LiftScheme::PolyPeriodic)?;
    }
    if a.noise_gauss != 0.0 {
        cloud = add_gaussian_noise(&cloud, a.noise_gauss, seed)?;
    }
    if a.noise_uniform_frac != 0.0 {
        cloud = add_uniform_background(&cloud, a.noise_uniform_frac, seed)?;
    }
    let format = cloud_format(&a.out, a.format);
    write_cloud(&cloud, &a.out, format)?;
    let manifest = run.finish(&a.out, &[&a.out])?;
    log::info!("manifest {}", manifest.display());
    println!("wrote {} points in {} dimensions to {}", cloud.n(), cloud.d(), a.out.display());
    Ok(())
}
