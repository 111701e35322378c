use std::collections::{BTreeSet, HashSet};
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context as _, Result};
use clap::Args;
use dimscope::io::{write_cloud, CloudFormat};
use dimscope::lsa::{embed_corpus, ngram_embeddings, read_stopwords, Corpus, EmbeddingTable};
use dimscope::CloudMeta;
use serde::Serialize;

use super::{cloud_format, create, parse_format, Context};
use crate::manifest::Run;

fn stopwords(run: &mut Run, path: Option<&Path>) -> Result<BTreeSet<String>> {
    match path {
        Some(p) => {
            run.input(p)?;
            read_stopwords(p).with_context(|| format!("reading stopwords {}", p.display()))
        }
        None => Ok(BTreeSet::new()),
    }
}

fn load_corpus(run: &mut Run, path: &Path) -> Result<Corpus> {
    run.input(path)?;
    let corpus = Corpus::load(path).with_context(|| format!("reading corpus {}", path.display()))?;
    if corpus.is_empty() {
        bail!("corpus {} has no documents", path.display());
    }
    Ok(corpus)
}

/// `table.tsv` -> `table.d5.tsv`.
pub fn truncated_path(out: &Path, d: usize) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy()).unwrap_or_default();
    let name = match out.extension() {
        Some(ext) => format!("{stem}.d{d}.{}", ext.to_string_lossy()),
        None => format!("{stem}.d{d}"),
    };
    out.with_file_name(name)
}

#[derive(Args, Debug, Serialize)]
pub struct EmbedArgs {
    /// Directory of token-per-whitespace text files, or a JSONL file of
    /// `{"id": .., "tokens": [..]}` records.
    corpus: PathBuf,
    /// One stopword per line.
    #[arg(long)]
    stopwords: Option<PathBuf>,
    /// Embedding dimension.
    #[arg(long, default_value_t = 15)]
    d: usize,
    /// Also write the table cut to these dimensions, as `<out>.d<k>.tsv`.
    #[arg(long, value_delimiter = ',')]
    truncate: Vec<usize>,
    /// Embedding table (TSV).
    #[arg(long)]
    out: PathBuf,
}

fn write_table(table: &EmbeddingTable, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    table.write_tsv(&mut w)?;
    w.flush()?;
    Ok(())
}

pub fn embed(ctx: &Context, a: EmbedArgs) -> Result<()> {
    let mut run = ctx.run("embed", &a)?;
    let stop = stopwords(&mut run, a.stopwords.as_deref())?;
    let corpus = load_corpus(&mut run, &a.corpus)?;
    for &k in &a.truncate {
        if k == 0 || k > a.d {
            bail!("--truncate {k} must lie in 1..={}", a.d);
        }
    }
    let model = embed_corpus(&corpus, &stop, a.d)?;
    if model.counts.dropped_documents > 0 {
        log::warn!("{} documents were empty after stopword removal and were skipped", model.counts.dropped_documents);
    }
    write_table(&model.table, &a.out)?;
    let extra: Vec<PathBuf> = a.truncate.iter().map(|&k| truncated_path(&a.out, k)).collect();
    for (&k, path) in a.truncate.iter().zip(&extra) {
        write_table(&model.table.truncate(k)?, path)?;
    }
    let mut outputs = vec![a.out.as_path()];
    outputs.extend(extra.iter().map(PathBuf::as_path));
    run.finish(&a.out, &outputs)?;
    println!(
        "embedded {} terms from {} documents in {} dimensions",
        model.table.len(),
        model.counts.n_docs(),
        model.table.dim
    );
    Ok(())
}

#[derive(Args, Debug, Serialize)]
pub struct NgramArgs {
    /// Embedding table (TSV) from `embed` or an external model.
    #[arg(long)]
    table: PathBuf,
    #[arg(long)]
    corpus: PathBuf,
    /// n-gram length.
    #[arg(long, default_value_t = 1)]
    n: usize,
    #[arg(long)]
    stopwords: Option<PathBuf>,
    /// Point cloud, one row per distinct n-gram.
    #[arg(long)]
    out: PathBuf,
    /// csv or bin; inferred from the extension of --out when absent.
    #[arg(long, value_parser = parse_format)]
    format: Option<CloudFormat>,
    /// Write the n-gram of each cloud row, one per line.
    #[arg(long)]
    keys: Option<PathBuf>,
    /// Keep one row per distinct vector (the first n-gram that has it).
    #[arg(long)]
    dedup: bool,
}

/// Rows of `table` whose vector has not occurred earlier.
fn distinct_rows(table: &EmbeddingTable) -> Vec<usize> {
    let mut seen = HashSet::new();
    (0..table.len())
        .filter(|&r| seen.insert(table.vector(r).iter().map(|x| x.to_bits()).collect::<Vec<u64>>()))
        .collect()
}

pub fn ngrams(ctx: &Context, a: NgramArgs) -> Result<()> {
    let mut run = ctx.run("ngrams", &a)?;
    let stop = stopwords(&mut run, a.stopwords.as_deref())?;
    run.input(&a.table)?;
    let file = std::fs::File::open(&a.table).with_context(|| format!("opening {}", a.table.display()))?;
    let table =
        EmbeddingTable::read_tsv(BufReader::new(file)).with_context(|| format!("reading {}", a.table.display()))?;
    let corpus = load_corpus(&mut run, &a.corpus)?;
    let (corpus, dropped) = corpus.filtered(&stop);
    if dropped > 0 {
        log::warn!("{dropped} documents were empty after stopword removal and were skipped");
    }
    if a.n == 0 {
        bail!("--n must be at least 1");
    }
    let grams = ngram_embeddings(&corpus, &table, a.n)?;
    if grams.oov_windows > 0 {
        log::warn!("{} windows skipped: a token has no embedding", grams.oov_windows);
    }
    if grams.table.is_empty() {
        bail!("no {}-grams could be embedded", a.n);
    }
    let mut table = grams.table;
    if a.dedup {
        let keep = distinct_rows(&table);
        log::info!("{} of {} n-gram vectors are distinct", keep.len(), table.len());
        let tokens = keep.iter().map(|&r| table.tokens[r].clone()).collect();
        let vectors = keep.iter().flat_map(|&r| table.vector(r).to_vec()).collect();
        table = EmbeddingTable::new(tokens, table.dim, vectors, Vec::new())?;
    }
    let meta = CloudMeta::new("ngrams")
        .with_param("n", a.n)
        .with_param("table", a.table.display())
        .with_param("corpus", a.corpus.display())
        .with_param("dedup", a.dedup);
    let cloud = table.to_point_cloud(meta)?;
    write_cloud(&cloud, &a.out, cloud_format(&a.out, a.format))?;
    let mut outputs = vec![a.out.as_path()];
    if let Some(keys) = &a.keys {
        let mut w = create(keys)?;
        for t in &table.tokens {
            writeln!(w, "{t}")?;
        }
        w.flush()?;
        outputs.push(keys);
    }
    run.finish(&a.out, &outputs)?;
    println!("wrote {} distinct {}-grams in {} dimensions", cloud.n(), a.n, cloud.d());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truncated_names() {
        assert_eq!(truncated_path(Path::new("o/t.tsv"), 5), PathBuf::from("o/t.d5.tsv"));
        assert_eq!(truncated_path(Path::new("t"), 10), PathBuf::from("t.d10"));
    }

    #[test]
    fn distinct_rows_keep_first_occurrence() {
        let t = EmbeddingTable::new(
            vec!["a".into(), "b".into(), "c".into(), "d".into()],
            2,
            vec![1.0, 0.0, 0.5, 0.5, 1.0, 0.0, 0.0, 1.0],
            Vec::new(),
        )
        .unwrap();
        assert_eq!(distinct_rows(&t), vec![0, 1, 3]);
    }
}
