use std::path::PathBuf;

use anyhow::{Context as _, Result};
use clap::Args;
use dimscope::schweinhart::{
    schedule_sizes, sweep_alpha, AlphaGrid, SizeSchedule, DEFAULT_GAMMA, DEFAULT_N_MIN, DEFAULT_REPLICATES,
    DEFAULT_SIZE_COUNT,
};
use dimscope::Seed;
use serde::Serialize;

use super::{check_sizes, create, load_cloud, write_json, Context};
use crate::manifest::manifest_name;

#[derive(Args, Debug, Serialize)]
pub struct SchweinhartArgs {
    /// Point cloud (CSV or binary).
    cloud: PathBuf,
    /// Drop repeated points before building trees.
    #[arg(long)]
    dedup: bool,
    #[arg(long, default_value_t = 1e-4)]
    alpha_start: f64,
    #[arg(long, default_value_t = 10.0)]
    alpha_stop: f64,
    #[arg(long, default_value_t = 0.1)]
    alpha_step: f64,
    /// Relative width allowed for the confidence intervals.
    #[arg(long, default_value_t = DEFAULT_GAMMA)]
    gamma: f64,
    /// Smallest subsample size of the automatic schedule; lowered to a
    /// tenth of the cloud when the cloud is too small for it.
    #[arg(long, default_value_t = DEFAULT_N_MIN)]
    n_min: usize,
    /// Number of sizes in the automatic schedule.
    #[arg(long, default_value_t = DEFAULT_SIZE_COUNT)]
    n_sizes: usize,
    /// Explicit subsample sizes, e.g. `1000,2000,4000,8000,16000`.
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    /// Independent subsamples per size.
    #[arg(long, default_value_t = DEFAULT_REPLICATES)]
    replicates: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// JSON report.
    #[arg(long)]
    out: PathBuf,
    /// Plot data `alpha,d_hat,ci_low,ci_high,admissible`.
    #[arg(long)]
    csv: Option<PathBuf>,
}

fn schedule(a: &SchweinhartArgs, n: usize) -> Result<SizeSchedule> {
    if let Some(sizes) = &a.sizes {
        check_sizes(sizes, n)?;
        return Ok(SizeSchedule::new(sizes.clone(), a.replicates)?);
    }
    let mut n_min = a.n_min;
    if n_min.saturating_mul(4) > n {
        let lowered = (n / 10).max(2);
        log::warn!("--n-min {n_min} is too large for {n} points; using {lowered}");
        n_min = lowered;
    }
    let s =
        schedule_sizes(n, n_min, a.n_sizes).with_context(|| format!("cannot build a size schedule for {n} points"))?;
    Ok(s.with_replicates(a.replicates)?)
}

pub fn run(ctx: &Context, a: SchweinhartArgs) -> Result<()> {
    let mut run = ctx.run("schweinhart", &a)?;
    run.seed("seed", a.seed);
    let cloud = load_cloud(&mut run, &a.cloud, a.dedup)?;
    let schedule = schedule(&a, cloud.n())?;
    let grid = AlphaGrid { start: a.alpha_start, stop: a.alpha_stop, step: a.alpha_step };
    let mut report = sweep_alpha(&cloud, grid, &schedule, a.gamma, Seed::new(a.seed))?;
    report.manifest = Some(manifest_name(&a.out));
    write_json(&a.out, &report)?;
    let mut outputs = vec![a.out.as_path()];
    if let Some(csv) = &a.csv {
        report.write_csv(create(csv)?)?;
        outputs.push(csv);
    }
    run.finish(&a.out, &outputs)?;
    let admitted = report.admissible_records().count();
    match (report.d_min, report.d_max) {
        (Some(lo), Some(hi)) => {
            println!("d_hat in [{lo:.4}, {hi:.4}] over {admitted} of {} alpha values", report.records.len())
        }
        _ => println!("no admissible alpha among {} values", report.records.len()),
    }
    Ok(())
}
