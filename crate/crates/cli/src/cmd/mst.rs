use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, ValueEnum};
use dimscope::mst::{build_emst_with, EmstAlgorithm};
use serde::Serialize;

use super::{create, load_cloud, write_json, Context};
use crate::manifest::manifest_name;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Auto,
    Prim,
    KdBoruvka,
}

impl From<Algorithm> for EmstAlgorithm {
    fn from(a: Algorithm) -> Self {
        match a {
            Algorithm::Auto => EmstAlgorithm::Auto,
            Algorithm::Prim => EmstAlgorithm::Prim,
            Algorithm::KdBoruvka => EmstAlgorithm::KdBoruvka,
        }
    }
}

#[derive(Args, Debug, Serialize)]
pub struct MstStatsArgs {
    /// Point cloud (CSV or binary).
    cloud: PathBuf,
    /// Drop repeated points before building trees.
    #[arg(long)]
    dedup: bool,
    /// JSON summary.
    #[arg(long)]
    out: PathBuf,
    /// Edge list `u,v,weight`.
    #[arg(long)]
    edges: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Algorithm::Auto)]
    algorithm: Algorithm,
    /// Exponents for which to report the power-weighted tree length.
    #[arg(long, value_delimiter = ',')]
    alpha: Vec<f64>,
}

#[derive(Serialize)]
struct PowerSum {
    alpha: f64,
    value: f64,
}

#[derive(Serialize)]
struct MstReport {
    schema_version: u32,
    n: usize,
    d: usize,
    total_weight: f64,
    mean_degree: f64,
    degree_statistic: f64,
    degree_histogram: BTreeMap<usize, usize>,
    edge_power_sums: Vec<PowerSum>,
    manifest: String,
}

pub fn run(ctx: &Context, a: MstStatsArgs) -> Result<()> {
    let mut run = ctx.run("mst-stats", &a)?;
    let cloud = load_cloud(&mut run, &a.cloud, a.dedup)?;
    let tree = build_emst_with(&cloud, a.algorithm.into())?;
    let summary = tree.summary();
    let edge_power_sums = a
        .alpha
        .iter()
        .map(|&alpha| Ok(PowerSum { alpha, value: tree.edge_power_sum(alpha)? }))
        .collect::<Result<Vec<_>>>()?;
    let report = MstReport {
        schema_version: REPORT_SCHEMA_VERSION,
        n: summary.n,
        d: cloud.d(),
        total_weight: summary.total_weight,
        mean_degree: tree.mean_degree(),
        degree_statistic: tree.degree_statistic(),
        degree_histogram: summary.degree_histogram,
        edge_power_sums,
        manifest: manifest_name(&a.out),
    };
    write_json(&a.out, &report)?;
    let mut outputs = vec![a.out.as_path()];
    if let Some(edges) = &a.edges {
        tree.write_edges_csv(create(edges)?)?;
        outputs.push(edges);
    }
    run.finish(&a.out, &outputs)?;
    println!("{} points, {} edges, total weight {:.6}", report.n, tree.edges().len(), report.total_weight);
    Ok(())
}
