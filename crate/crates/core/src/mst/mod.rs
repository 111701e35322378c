//! Exact Euclidean minimum spanning trees and the two tree statistics the
//! estimators consume: the power-weighted length `Σ |e|^α` and the mean
//! squared vertex degree.
//!
//! Two constructions are available. [`EmstAlgorithm::Prim`] is the dense
//! `O(n²)` baseline; [`EmstAlgorithm::KdBoruvka`] runs Borůvka rounds over a
//! k-d tree. Both order edges by `(length, min endpoint, max endpoint)`, a
//! strict total order under which the minimum tree is unique, so they return
//! identical edge lists.

mod boruvka;
mod kdtree;
mod prim;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::cloud::{CloudMeta, PointCloud};
use crate::error::{Error, Result};
use crate::io::fmt_f64;

/// Under [`EmstAlgorithm::Auto`], clouds this small always take the dense path.
pub const AUTO_DENSE_LIMIT: usize = 256;
/// ...as do clouds of at least this many coordinates with up to
/// [`AUTO_DENSE_LIMIT_HIGH_D`] points, where k-d pruning stops paying off.
pub const AUTO_HIGH_D: usize = 10;
pub const AUTO_DENSE_LIMIT_HIGH_D: usize = 4096;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum EmstAlgorithm {
    #[default]
    Auto,
    Prim,
    KdBoruvka,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
}

/// Edge ordered by squared length, then by endpoints.
#[derive(Clone, Copy, Debug)]
pub(crate) struct EdgeKey {
    pub sq: f64,
    pub lo: usize,
    pub hi: usize,
}

impl EdgeKey {
    pub const INFINITE: EdgeKey = EdgeKey { sq: f64::INFINITY, lo: usize::MAX, hi: usize::MAX };

    #[inline]
    pub fn new(sq: f64, a: usize, b: usize) -> Self {
        EdgeKey { sq, lo: a.min(b), hi: a.max(b) }
    }
}

impl PartialEq for EdgeKey {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for EdgeKey {}

impl PartialOrd for EdgeKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for EdgeKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.sq.total_cmp(&other.sq).then(self.lo.cmp(&other.lo)).then(self.hi.cmp(&other.hi))
    }
}

#[inline]
pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for (x, y) in a.iter().zip(b) {
        let t = x - y;
        s += t * t;
    }
    s
}

/// Same sum as [`sq_dist`], abandoned once a partial sum exceeds `limit`.
#[inline]
pub(crate) fn sq_dist_bounded(a: &[f64], b: &[f64], limit: f64) -> Option<f64> {
    let mut s = 0.0;
    for (ca, cb) in a.chunks(8).zip(b.chunks(8)) {
        for (x, y) in ca.iter().zip(cb) {
            let t = x - y;
            s += t * t;
        }
        if s > limit {
            return None;
        }
    }
    Some(s)
}

/// The exact Euclidean minimum spanning tree of a cloud.
#[derive(Clone, Debug, PartialEq)]
pub struct MinimumSpanningTree {
    n: usize,
    /// Sorted by `(weight, u, v)`, with `u < v`.
    edges: Vec<Edge>,
    pub source_meta: CloudMeta,
}

impl MinimumSpanningTree {
    fn from_keys(n: usize, mut keys: Vec<EdgeKey>, source_meta: CloudMeta) -> Self {
        keys.sort_unstable();
        let edges = keys.into_iter().map(|k| Edge { u: k.lo, v: k.hi, weight: k.sq.sqrt() }).collect();
        let tree = MinimumSpanningTree { n, edges, source_meta };
        let degree_sum: usize = tree.degrees().iter().sum();
        assert_eq!(degree_sum, 2 * (n - 1), "handshake identity violated");
        tree
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn weights(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        self.edges.iter().map(|e| e.weight)
    }

    pub fn total_weight(&self) -> f64 {
        self.weights().sum()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0usize; self.n];
        for e in &self.edges {
            deg[e.u] += 1;
            deg[e.v] += 1;
        }
        deg
    }

    pub fn mean_degree(&self) -> f64 {
        self.degrees().iter().sum::<usize>() as f64 / self.n as f64
    }

    /// `Σ |e|^α` over the tree edges.
    pub fn edge_power_sum(&self, alpha: f64) -> Result<f64> {
        edge_power_sum_of(self.weights(), alpha)
    }

    /// `(1/n) Σ deg(i)²`.
    pub fn degree_statistic(&self) -> f64 {
        let s: usize = self.degrees().iter().map(|k| k * k).sum();
        s as f64 / self.n as f64
    }

    pub fn summary(&self) -> TreeSummary {
        let mut histogram = BTreeMap::new();
        for k in self.degrees() {
            *histogram.entry(k).or_insert(0usize) += 1;
        }
        TreeSummary { schema_version: 1, n: self.n, total_weight: self.total_weight(), degree_histogram: histogram }
    }

    /// CSV `u,v,weight`, one edge per line.
    pub fn write_edges_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "u,v,weight")?;
        for e in &self.edges {
            writeln!(w, "{},{},{}", e.u, e.v, fmt_f64(e.weight))?;
        }
        w.flush()?;
        Ok(())
    }
}

pub(crate) fn edge_power_sum_of(weights: impl Iterator<Item = f64>, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::invalid(format!("alpha must be positive and finite, got {alpha}")));
    }
    Ok(weights.map(|w| if w == 0.0 { 0.0 } else { w.powf(alpha) }).sum())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeSummary {
    pub schema_version: u32,
    pub n: usize,
    pub total_weight: f64,
    /// Degree -> number of vertices with that degree.
    pub degree_histogram: BTreeMap<usize, usize>,
}

pub fn build_emst(cloud: &PointCloud) -> Result<MinimumSpanningTree> {
    build_emst_with(cloud, EmstAlgorithm::Auto)
}

pub fn build_emst_with(cloud: &PointCloud, algorithm: EmstAlgorithm) -> Result<MinimumSpanningTree> {
    let n = cloud.n();
    if n < 2 {
        return Err(Error::invalid(format!("a spanning tree needs at least 2 points, got {n}")));
    }
    if cloud.as_slice().iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("cloud has non-finite coordinates"));
    }
    let algorithm = match algorithm {
        EmstAlgorithm::Auto if n <= AUTO_DENSE_LIMIT || (cloud.d() >= AUTO_HIGH_D && n <= AUTO_DENSE_LIMIT_HIGH_D) => {
            EmstAlgorithm::Prim
        }
        EmstAlgorithm::Auto => EmstAlgorithm::KdBoruvka,
        a => a,
    };
    let keys = match algorithm {
        EmstAlgorithm::Prim => prim::prim(cloud),
        _ => boruvka::kd_boruvka(cloud),
    };
    Ok(MinimumSpanningTree::from_keys(n, keys, cloud.meta.clone()))
}

pub fn edge_power_sum(tree: &MinimumSpanningTree, alpha: f64) -> Result<f64> {
    tree.edge_power_sum(alpha)
}

pub fn degree_statistic(tree: &MinimumSpanningTree) -> f64 {
    tree.degree_statistic()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Seed;
    use proptest::prelude::*;
    use rand::Rng;

    fn cloud(rows: &[&[f64]]) -> PointCloud {
        PointCloud::from_rows(rows, CloudMeta::new("t")).unwrap()
    }

    fn random_cloud(n: usize, d: usize, seed: u64) -> PointCloud {
        let mut rng = Seed(seed).stream("mst-test", &[n as u64, d as u64]);
        let pts = (0..n * d).map(|_| rng.random::<f64>()).collect();
        PointCloud::new(pts, d, CloudMeta::new("t")).unwrap()
    }

    /// Minimum over every labelled tree on `n` vertices, decoded from Prüfer
    /// sequences (Cayley: `n^(n-2)` of them).
    fn brute_force_min_weight(c: &PointCloud) -> f64 {
        let n = c.n();
        let dist = |i: usize, j: usize| sq_dist(c.row(i), c.row(j)).sqrt();
        if n == 2 {
            return dist(0, 1);
        }
        let mut seq = vec![0usize; n - 2];
        let mut best = f64::INFINITY;
        loop {
            let mut degree = vec![1usize; n];
            for &s in &seq {
                degree[s] += 1;
            }
            let mut total = 0.0;
            for &s in &seq {
                let leaf = (0..n).find(|&v| degree[v] == 1).unwrap();
                total += dist(leaf, s);
                degree[leaf] -= 1;
                degree[s] -= 1;
            }
            let rest: Vec<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
            total += dist(rest[0], rest[1]);
            best = best.min(total);
            // Next sequence in base-n counting order.
            let mut k = 0;
            while k < seq.len() && seq[k] == n - 1 {
                seq[k] = 0;
                k += 1;
            }
            if k == seq.len() {
                break;
            }
            seq[k] += 1;
        }
        best
    }

    #[test]
    fn two_points() {
        let t = build_emst(&cloud(&[&[0.0, 0.0], &[3.0, 0.0]])).unwrap();
        assert_eq!(t.edges(), &[Edge { u: 0, v: 1, weight: 3.0 }]);
        assert_eq!(t.degree_statistic(), 1.0);
    }

    #[test]
    fn collinear_path() {
        let c = cloud(&[&[2.0], &[0.0], &[4.0], &[1.0], &[3.0]]);
        for algo in [EmstAlgorithm::Prim, EmstAlgorithm::KdBoruvka] {
            let t = build_emst_with(&c, algo).unwrap();
            assert_eq!(t.total_weight(), 4.0);
            assert!(t.weights().all(|w| w == 1.0));
            assert!((t.degree_statistic() - 2.8).abs() < 1e-15);
        }
    }

    #[test]
    fn edge_power_sums() {
        let t = build_emst(&cloud(&[&[0.0], &[1.0], &[2.0]])).unwrap();
        assert_eq!(edge_power_sum(&t, 2.0).unwrap(), 2.0);
        assert_eq!(edge_power_sum(&t, 0.5).unwrap(), 2.0);
        assert!(edge_power_sum(&t, 0.0).is_err());
        assert!(edge_power_sum(&t, -1.0).is_err());
        assert!(edge_power_sum(&t, f64::NAN).is_err());
    }

    #[test]
    fn star_statistic() {
        // Satellites at distance 1 from the centre and sqrt(3) from each other.
        let s = 3f64.sqrt() / 2.0;
        let c = cloud(&[&[0.0, 0.0], &[1.0, 0.0], &[-0.5, s], &[-0.5, -s]]);
        let t = build_emst(&c).unwrap();
        assert!((brute_force_min_weight(&c) - t.total_weight()).abs() < 1e-12);
        assert!(t.edges().iter().all(|e| e.u == 0));
        assert_eq!(t.degree_statistic(), 3.0);
    }

    #[test]
    fn duplicates_give_zero_edges() {
        let c = cloud(&[&[1.0, 1.0], &[1.0, 1.0], &[2.0, 1.0]]);
        let t = build_emst(&c).unwrap();
        assert_eq!(t.edges()[0], Edge { u: 0, v: 1, weight: 0.0 });
        assert_eq!(t.edge_power_sum(1.5).unwrap(), 1.0);
    }

    #[test]
    fn rejects_single_point() {
        assert!(matches!(build_emst(&cloud(&[&[1.0]])), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn ties_are_broken_by_index() {
        // Unit square: four edges of length 1, any three form an MST.
        let c = cloud(&[&[0.0, 0.0], &[1.0, 0.0], &[1.0, 1.0], &[0.0, 1.0]]);
        for algo in [EmstAlgorithm::Prim, EmstAlgorithm::KdBoruvka] {
            let t = build_emst_with(&c, algo).unwrap();
            let pairs: Vec<(usize, usize)> = t.edges().iter().map(|e| (e.u, e.v)).collect();
            assert_eq!(pairs, vec![(0, 1), (0, 3), (1, 2)]);
        }
    }

    #[test]
    fn lattice_with_many_ties_matches_across_algorithms() {
        let mut rows = Vec::new();
        for i in 0..30 {
            for j in 0..30 {
                rows.push(vec![i as f64, j as f64]);
            }
        }
        let c = PointCloud::from_rows(&rows, CloudMeta::new("grid")).unwrap();
        let a = build_emst_with(&c, EmstAlgorithm::Prim).unwrap();
        let b = build_emst_with(&c, EmstAlgorithm::KdBoruvka).unwrap();
        assert_eq!(a.edges(), b.edges());
        assert_eq!(a.total_weight(), 899.0);
    }

    #[test]
    fn algorithms_agree_on_random_clouds() {
        for (n, d) in [(50, 1), (300, 2), (1000, 3), (700, 7), (400, 20)] {
            let c = random_cloud(n, d, 11);
            let a = build_emst_with(&c, EmstAlgorithm::Prim).unwrap();
            let b = build_emst_with(&c, EmstAlgorithm::KdBoruvka).unwrap();
            assert_eq!(a.edges(), b.edges(), "n={n} d={d}");
        }
    }

    #[test]
    fn summary_histogram() {
        let t = build_emst(&cloud(&[&[0.0], &[1.0], &[2.0], &[3.0], &[4.0]])).unwrap();
        let s = t.summary();
        assert_eq!(s.n, 5);
        assert_eq!(s.total_weight, 4.0);
        assert_eq!(s.degree_histogram, BTreeMap::from([(1, 2), (2, 3)]));
        let mut csv = Vec::new();
        t.write_edges_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with("u,v,weight\n0,1,1.0000000000000000e0\n"));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn matches_exhaustive_enumeration(n in 2usize..=7, d in 1usize..=4, seed in any::<u64>()) {
            let c = random_cloud(n, d, seed);
            let t = build_emst(&c).unwrap();
            prop_assert!((t.total_weight() - brute_force_min_weight(&c)).abs() <= 1e-12);
            prop_assert_eq!(t.edges().len(), n - 1);
        }

        #[test]
        fn permutation_invariance(n in 2usize..200, seed in any::<u64>()) {
            let c = random_cloud(n, 3, seed);
            let p = crate::cloud::subsample(&c, n, Seed(seed ^ 1)).unwrap();
            let a = build_emst_with(&c, EmstAlgorithm::KdBoruvka).unwrap();
            let b = build_emst_with(&p, EmstAlgorithm::KdBoruvka).unwrap();
            let wa: Vec<u64> = a.weights().map(f64::to_bits).collect();
            let wb: Vec<u64> = b.weights().map(f64::to_bits).collect();
            prop_assert_eq!(wa, wb);
        }

        #[test]
        fn scale_covariance(n in 2usize..100, s in 0.01f64..100.0, alpha in 0.1f64..5.0, seed in any::<u64>()) {
            let c = random_cloud(n, 2, seed);
            let a = build_emst(&c).unwrap();
            let b = build_emst(&c.scaled(s).unwrap()).unwrap();
            for (wa, wb) in a.weights().zip(b.weights()) {
                prop_assert!((wa * s - wb).abs() <= 1e-12 * wb.max(1e-300));
            }
            let ea = a.edge_power_sum(alpha).unwrap();
            let eb = b.edge_power_sum(alpha).unwrap();
            prop_assert!((ea * s.powf(alpha) - eb).abs() <= 1e-10 * eb);
        }

        #[test]
        fn power_sum_monotone_in_alpha(n in 2usize..60, seed in any::<u64>(), a1 in 0.1f64..4.0, da in 0.0f64..4.0) {
            let small = build_emst(&random_cloud(n, 2, seed)).unwrap();
            prop_assume!(small.weights().all(|w| w <= 1.0));
            prop_assert!(small.edge_power_sum(a1 + da).unwrap() <= small.edge_power_sum(a1).unwrap());
            let big = build_emst(&random_cloud(n, 2, seed).scaled(1e3).unwrap()).unwrap();
            prop_assume!(big.weights().all(|w| w >= 1.0));
            prop_assert!(big.edge_power_sum(a1 + da).unwrap() >= big.edge_power_sum(a1).unwrap());
        }
    }
}
