//! Latent semantic analysis embeddings and n-gram clouds.
//!
//! A tokenized corpus becomes a term-document count matrix `n_ij`. Each term
//! gets the normalized entropy `ε_i` of its spread over documents, and the
//! weighted matrix `w_ij = (1 − ε_i) n_ij / Σ_i' n_i'j` is factored by a
//! truncated SVD `W ≈ U Λ Vᵀ`. Rows of `U` are the word embeddings; an
//! n-gram is embedded as the concatenation of its words' vectors.
//!
//! Tokenization and lemmatization happen upstream: documents arrive as
//! whitespace-separated token files or JSONL records.

mod sparse;
mod svd;

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::Deserialize;

pub use sparse::SparseMatrix;
pub use svd::{truncated_svd, TruncatedSvd};

use crate::cloud::{CloudMeta, PointCloud};
use crate::error::{Error, Result};
use crate::io::fmt_f64;
use crate::par;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Corpus {
    pub ids: Vec<String>,
    pub documents: Vec<Vec<String>>,
}

#[derive(Deserialize)]
struct JsonlDoc {
    id: serde_json::Value,
    tokens: Vec<String>,
}

impl Corpus {
    /// Documents named `doc0`, `doc1`, ...
    pub fn new(documents: Vec<Vec<String>>) -> Self {
        let ids = (0..documents.len()).map(|i| format!("doc{i}")).collect();
        Corpus { ids, documents }
    }

    pub fn from_tokens<S: AsRef<str>>(documents: &[Vec<S>]) -> Self {
        Corpus::new(documents.iter().map(|d| d.iter().map(|t| t.as_ref().to_string()).collect()).collect())
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    /// A directory holds one document per file (files in name order, hidden
    /// files skipped); any other path is read as JSONL.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        if path.is_dir() {
            Self::from_dir(path)
        } else {
            Self::from_jsonl(BufReader::new(fs::File::open(path)?))
        }
    }

    pub fn from_dir(dir: &Path) -> Result<Self> {
        let mut files: Vec<_> = fs::read_dir(dir)?
            .filter_map(|e| e.ok())
            .map(|e| e.path())
            .filter(|p| p.is_file() && !p.file_name().is_some_and(|n| n.to_string_lossy().starts_with('.')))
            .collect();
        files.sort();
        let mut ids = Vec::with_capacity(files.len());
        let mut documents = Vec::with_capacity(files.len());
        for f in files {
            let text = fs::read_to_string(&f)?;
            ids.push(f.file_name().unwrap().to_string_lossy().into_owned());
            documents.push(text.split_whitespace().map(str::to_string).collect());
        }
        Ok(Corpus { ids, documents })
    }

    /// One `{"id": ..., "tokens": [...]}` object per line; blank lines skipped.
    pub fn from_jsonl<R: BufRead>(r: R) -> Result<Self> {
        let mut ids = Vec::new();
        let mut documents = Vec::new();
        for (k, line) in r.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let doc: JsonlDoc =
                serde_json::from_str(&line).map_err(|e| Error::Parse(format!("JSONL line {}: {e}", k + 1)))?;
            ids.push(match doc.id {
                serde_json::Value::String(s) => s,
                other => other.to_string(),
            });
            documents.push(doc.tokens);
        }
        Ok(Corpus { ids, documents })
    }

    /// Removes stopwords, then drops documents left empty.
    pub fn filtered(&self, stopwords: &BTreeSet<String>) -> (Corpus, usize) {
        let mut out = Corpus { ids: Vec::new(), documents: Vec::new() };
        let mut dropped = 0;
        for (id, doc) in self.ids.iter().zip(&self.documents) {
            let kept: Vec<String> = doc.iter().filter(|t| !stopwords.contains(*t)).cloned().collect();
            if kept.is_empty() {
                dropped += 1;
            } else {
                out.ids.push(id.clone());
                out.documents.push(kept);
            }
        }
        (out, dropped)
    }
}

/// One token per line; blank lines and surrounding whitespace ignored.
pub fn read_stopwords(path: impl AsRef<Path>) -> Result<BTreeSet<String>> {
    let text = fs::read_to_string(path)?;
    Ok(text.lines().map(str::trim).filter(|l| !l.is_empty()).map(str::to_string).collect())
}

/// Term-document counts `n_ij`, terms in first-occurrence order.
#[derive(Clone, Debug, PartialEq)]
pub struct CountMatrix {
    pub vocabulary: Vec<String>,
    /// `M x N` counts, stored as reals for the weighting step.
    pub counts: SparseMatrix,
    /// `τ_i = Σ_j n_ij`.
    pub row_totals: Vec<u64>,
    /// Filtered length of each document.
    pub col_totals: Vec<u64>,
    /// Documents removed because stopword filtering left them empty.
    pub dropped_documents: usize,
}

impl CountMatrix {
    pub fn n_terms(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn n_docs(&self) -> usize {
        self.col_totals.len()
    }

    pub fn count(&self, term: usize, doc: usize) -> u64 {
        self.counts.get(term, doc) as u64
    }
}

pub fn count_matrix(corpus: &Corpus, stopwords: &BTreeSet<String>) -> Result<CountMatrix> {
    let (corpus, dropped) = corpus.filtered(stopwords);
    if corpus.len() < 2 {
        return Err(Error::invalid(format!(
            "need at least 2 nonempty documents after stopword removal, got {}",
            corpus.len()
        )));
    }
    // Per-document tallies in parallel, as (position of first occurrence,
    // count); term ids are assigned afterwards in corpus order.
    let tallies: Vec<Vec<(usize, u64)>> = par::map_slice(&corpus.documents, |doc| {
        let mut seen: HashMap<&str, usize> = HashMap::new();
        let mut out: Vec<(usize, u64)> = Vec::new();
        for (pos, t) in doc.iter().enumerate() {
            match seen.get(t.as_str()) {
                Some(&k) => out[k].1 += 1,
                None => {
                    seen.insert(t, out.len());
                    out.push((pos, 1));
                }
            }
        }
        out
    });
    let mut index: HashMap<&str, usize> = HashMap::new();
    let mut vocabulary = Vec::new();
    let mut triplets = Vec::new();
    let mut row_totals: Vec<u64> = Vec::new();
    let mut col_totals = Vec::with_capacity(corpus.len());
    for (j, tally) in tallies.iter().enumerate() {
        let mut len = 0;
        for &(pos, c) in tally {
            let t = corpus.documents[j][pos].as_str();
            let i = *index.entry(t).or_insert_with(|| {
                vocabulary.push(t.to_string());
                row_totals.push(0);
                vocabulary.len() - 1
            });
            row_totals[i] += c;
            len += c;
            triplets.push((i, j, c as f64));
        }
        col_totals.push(len);
    }
    let counts = SparseMatrix::from_triplets(vocabulary.len(), corpus.len(), &triplets)?;
    Ok(CountMatrix { vocabulary, counts, row_totals, col_totals, dropped_documents: dropped })
}

/// Normalized entropy of each term's distribution over documents, natural
/// log throughout.
pub fn entropy_weights(counts: &CountMatrix) -> Result<Vec<f64>> {
    let n = counts.n_docs();
    if n < 2 {
        return Err(Error::invalid("entropy normalization needs at least 2 documents"));
    }
    let log_n = (n as f64).ln();
    (0..counts.n_terms())
        .map(|i| {
            let tau = counts.row_totals[i] as f64;
            if tau <= 0.0 {
                return Err(Error::invalid(format!("term {:?} never occurs", counts.vocabulary[i])));
            }
            let h: f64 = counts
                .counts
                .row(i)
                .map(|(_, c)| {
                    let p = c / tau;
                    -p * p.ln()
                })
                .sum();
            // Rounding can leave a perfectly even spread a hair off 1.
            let e = h / log_n;
            Ok(if e > 1.0 - 1e-12 { 1.0 } else { e.max(0.0) })
        })
        .collect()
}

/// `w_ij = (1 − ε_i) n_ij / (length of document j)`.
pub fn weight_matrix(counts: &CountMatrix, eps: &[f64]) -> Result<SparseMatrix> {
    if eps.len() != counts.n_terms() {
        return Err(Error::invalid(format!("{} entropy weights for {} terms", eps.len(), counts.n_terms())));
    }
    let mut triplets = Vec::with_capacity(counts.counts.nnz());
    for (i, e) in eps.iter().enumerate() {
        for (j, c) in counts.counts.row(i) {
            triplets.push((i, j, (1.0 - e) * c / counts.col_totals[j] as f64));
        }
    }
    SparseMatrix::from_triplets(counts.n_terms(), counts.n_docs(), &triplets)
}

/// Vectors of equal dimension keyed by token. `singular_values` is empty
/// for tables that did not come from a factorization (n-grams, external).
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingTable {
    pub tokens: Vec<String>,
    pub dim: usize,
    /// Row-major `tokens.len() x dim`.
    pub vectors: Vec<f64>,
    pub singular_values: Vec<f64>,
}

impl EmbeddingTable {
    pub fn new(tokens: Vec<String>, dim: usize, vectors: Vec<f64>, singular_values: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("embedding dimension must be at least 1"));
        }
        if vectors.len() != tokens.len() * dim {
            return Err(Error::invalid("embedding vectors do not match tokens x dim"));
        }
        if vectors.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("embedding vectors contain non-finite values"));
        }
        if tokens.iter().any(|t| t.contains(['\t', '\n', '\r'])) {
            return Err(Error::invalid("tokens may not contain tabs or line breaks"));
        }
        Ok(EmbeddingTable { tokens, dim, vectors, singular_values })
    }

    /// Word table from an SVD of the weight matrix: rows of `U`.
    pub fn from_svd(vocabulary: &[String], svd: &TruncatedSvd) -> Result<Self> {
        if vocabulary.len() != svd.rows {
            return Err(Error::invalid("vocabulary size differs from the SVD row count"));
        }
        Self::new(vocabulary.to_vec(), svd.k, svd.u.clone(), svd.sigma.clone())
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn vector(&self, row: usize) -> &[f64] {
        &self.vectors[row * self.dim..(row + 1) * self.dim]
    }

    fn index(&self) -> HashMap<&str, usize> {
        self.tokens.iter().enumerate().map(|(k, t)| (t.as_str(), k)).collect()
    }

    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.tokens.iter().position(|t| t == token).map(|k| self.vector(k))
    }

    /// First `d2` coordinates of every vector and the first `d2` singular values.
    pub fn truncate(&self, d2: usize) -> Result<EmbeddingTable> {
        if d2 == 0 || d2 > self.dim {
            return Err(Error::invalid(format!("truncation must lie in 1..={}, got {d2}", self.dim)));
        }
        let vectors = (0..self.len()).flat_map(|r| self.vector(r)[..d2].to_vec()).collect();
        let sv = self.singular_values.iter().take(d2).copied().collect();
        EmbeddingTable::new(self.tokens.clone(), d2, vectors, sv)
    }

    pub fn to_point_cloud(&self, meta: CloudMeta) -> Result<PointCloud> {
        PointCloud::new(self.vectors.clone(), self.dim, meta)
    }

    /// TSV with a `#dim=d #sigma=s1,s2,...` header, then `token\tv0\t...`.
    pub fn write_tsv<W: Write>(&self, mut w: W) -> Result<()> {
        let sigma: Vec<String> = self.singular_values.iter().map(|s| fmt_f64(*s)).collect();
        writeln!(w, "#dim={} #sigma={}", self.dim, sigma.join(","))?;
        let mut line = String::new();
        for r in 0..self.len() {
            line.clear();
            line.push_str(&self.tokens[r]);
            for v in self.vector(r) {
                line.push('\t');
                line.push_str(&fmt_f64(*v));
            }
            line.push('\n');
            w.write_all(line.as_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads [`write_tsv`](Self::write_tsv) output. The header is optional,
    /// so plain `token\tvalues...` tables from other tools load too.
    pub fn read_tsv<R: BufRead>(r: R) -> Result<EmbeddingTable> {
        let mut dim: Option<usize> = None;
        let mut singular_values = Vec::new();
        let mut tokens = Vec::new();
        let mut vectors = Vec::new();
        for (k, line) in r.lines().enumerate() {
            let line = line?;
            let lineno = k + 1;
            if line.trim().is_empty() {
                continue;
            }
            if k == 0 && line.starts_with('#') {
                for field in line.split_whitespace() {
                    if let Some(v) = field.strip_prefix("#dim=") {
                        dim = Some(v.parse().map_err(|_| Error::Parse(format!("bad dim in header: {v:?}")))?);
                    } else if let Some(v) = field.strip_prefix("#sigma=") {
                        singular_values = v
                            .split(',')
                            .filter(|s| !s.is_empty())
                            .map(|s| s.parse().map_err(|_| Error::Parse(format!("bad singular value {s:?}"))))
                            .collect::<Result<_>>()?;
                    }
                }
                continue;
            }
            let mut fields = line.split('\t');
            let token = fields.next().unwrap().to_string();
            let before = vectors.len();
            for f in fields {
                vectors.push(
                    f.trim().parse::<f64>().map_err(|_| Error::Parse(format!("line {lineno}: bad number {f:?}")))?,
                );
            }
            let got = vectors.len() - before;
            let d = *dim.get_or_insert(got);
            if got != d {
                return Err(Error::Parse(format!("line {lineno}: expected {d} values, found {got}")));
            }
            tokens.push(token);
        }
        let dim = dim.ok_or_else(|| Error::Parse("embedding table is empty".into()))?;
        EmbeddingTable::new(tokens, dim, vectors, singular_values)
    }
}

/// Summary of a corpus-to-table run.
#[derive(Clone, Debug, PartialEq)]
pub struct LsaModel {
    pub counts: CountMatrix,
    pub entropy: Vec<f64>,
    pub svd: TruncatedSvd,
    pub table: EmbeddingTable,
}

/// Counting, weighting and factorization in one call.
pub fn embed_corpus(corpus: &Corpus, stopwords: &BTreeSet<String>, d: usize) -> Result<LsaModel> {
    let counts = count_matrix(corpus, stopwords)?;
    if counts.n_terms() == 0 {
        return Err(Error::invalid("vocabulary is empty"));
    }
    let entropy = entropy_weights(&counts)?;
    let w = weight_matrix(&counts, &entropy)?;
    let svd = truncated_svd(&w, d)?;
    let table = EmbeddingTable::from_svd(&counts.vocabulary, &svd)?;
    Ok(LsaModel { counts, entropy, svd, table })
}

#[derive(Clone, Debug, PartialEq)]
pub struct NgramTable {
    pub n: usize,
    pub table: EmbeddingTable,
    /// Windows skipped because one of their tokens has no embedding.
    pub oov_windows: usize,
}

/// Unique within-document n-grams, keyed by their tokens joined with a
/// space and embedded as the concatenation of the word vectors.
pub fn ngram_embeddings(corpus: &Corpus, table: &EmbeddingTable, n: usize) -> Result<NgramTable> {
    if n == 0 {
        return Err(Error::invalid("n-gram length must be at least 1"));
    }
    let index = table.index();
    let mut seen: HashMap<String, ()> = HashMap::new();
    let mut tokens = Vec::new();
    let mut vectors = Vec::new();
    let mut oov = 0;
    for doc in &corpus.documents {
        if doc.len() < n {
            continue;
        }
        for window in doc.windows(n) {
            let Some(rows) = window.iter().map(|t| index.get(t.as_str()).copied()).collect::<Option<Vec<_>>>() else {
                oov += 1;
                continue;
            };
            let key = window.join(" ");
            if seen.contains_key(&key) {
                continue;
            }
            for r in rows {
                vectors.extend_from_slice(table.vector(r));
            }
            seen.insert(key.clone(), ());
            tokens.push(key);
        }
    }
    Ok(NgramTable { n, table: EmbeddingTable::new(tokens, n * table.dim, vectors, Vec::new())?, oov_windows: oov })
}
