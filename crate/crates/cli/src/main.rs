//! `dimscope`: intrinsic dimension experiments from the command line.

mod cmd;
mod config;
mod manifest;

use std::ffi::OsString;

use anyhow::Result;
use clap::{Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "dimscope", version, about = "Intrinsic dimension estimation for point clouds and text embeddings")]
#[command(args_override_self = true)]
pub struct Cli {
    /// Worker threads for the parallel loops (0 = one per core). Results do
    /// not depend on this.
    #[arg(long, global = true, env = "DIMSCOPE_THREADS", default_value_t = 0)]
    threads: usize,

    /// `key = value` file supplying defaults for any flag; flags on the
    /// command line win.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<std::path::PathBuf>,

    /// More log output (repeat for debug output).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw a synthetic point cloud.
    Sample(cmd::sample::SampleArgs),
    /// Growth-rate dimension estimates over a grid of exponents.
    Schweinhart(cmd::schweinhart::SchweinhartArgs),
    /// Build a calibration table for the degree estimator.
    BritoCalibrate(cmd::brito::CalibrateArgs),
    /// Integer dimension from mean squared tree degree.
    Brito(cmd::brito::BritoArgs),
    /// LSA word embeddings from a tokenized corpus.
    Embed(cmd::lsa::EmbedArgs),
    /// Point cloud of n-gram embeddings.
    Ngrams(cmd::lsa::NgramArgs),
    /// Spanning-tree summary of a cloud.
    MstStats(cmd::mst::MstStatsArgs),
}

#[cfg(feature = "parallel")]
pub(crate) fn worker_threads() -> usize {
    rayon::current_num_threads()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn worker_threads() -> usize {
    1
}

#[cfg(feature = "parallel")]
fn init_threads(n: usize) -> Result<()> {
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

#[cfg(not(feature = "parallel"))]
fn init_threads(n: usize) -> Result<()> {
    if n > 1 {
        log::warn!("built without the parallel feature; --threads {n} ignored");
    }
    Ok(())
}

fn run(args: Vec<OsString>) -> Result<()> {
    let argv: Vec<String> = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let (args, config) = config::expand(args)?;
    let cli = Cli::parse_from(args);
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).format_timestamp(None).init();
    init_threads(cli.threads)?;
    let ctx = cmd::Context { argv, config };
    match cli.command {
        Command::Sample(a) => cmd::sample::run(&ctx, a),
        Command::Schweinhart(a) => cmd::schweinhart::run(&ctx, a),
        Command::BritoCalibrate(a) => cmd::brito::calibrate(&ctx, a),
        Command::Brito(a) => cmd::brito::run(&ctx, a),
        Command::Embed(a) => cmd::lsa::embed(&ctx, a),
        Command::Ngrams(a) => cmd::lsa::ngrams(&ctx, a),
        Command::MstStats(a) => cmd::mst::run(&ctx, a),
    }
}

fn main() {
    if let Err(e) = run(std::env::args_os().collect()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
