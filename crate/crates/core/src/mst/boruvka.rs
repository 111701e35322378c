//! Borůvka's algorithm over a k-d tree.
//!
//! Each round, every point looks for its nearest neighbour outside its own
//! component; the lightest such edge per component joins the tree. Three
//! prunings keep the searches short:
//!
//! * subtrees lying entirely inside the querying point's component are
//!   skipped (`node_comp`);
//! * a per-component bound, shared between the component's points, cuts any
//!   subtree farther than the best edge already found for that component;
//! * a point's exact nearest foreign neighbour stays valid for as long as that
//!   neighbour remains foreign, since components only ever merge.
//!
//! All comparisons use the same strict total order on edges as the dense
//! path, so the result is the unique minimum tree under that order no matter
//! how the queries are scheduled.

use std::sync::atomic::{AtomicU64, Ordering};

use super::kdtree::KdTree;
use super::{sq_dist, sq_dist_bounded, EdgeKey};
use crate::cloud::PointCloud;
use crate::par;

const MIXED: usize = usize::MAX;

struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect(), size: vec![1; n] }
    }

    fn find(&mut self, mut x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        while self.parent[x] != root {
            let next = self.parent[x];
            self.parent[x] = root;
            x = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }
}

/// Nearest foreign neighbour found by one query.
#[derive(Clone, Copy)]
struct Found {
    key: EdgeKey,
    /// Tree position of the neighbour.
    other: usize,
    /// True when no subtree was cut by the shared component bound, i.e. this
    /// is the point's true nearest foreign neighbour.
    exact: bool,
}

struct Round<'a> {
    tree: &'a KdTree,
    comp: &'a [usize],
    node_comp: &'a [usize],
    bound: &'a [AtomicU64],
}

impl Round<'_> {
    fn bound(&self, c: usize) -> f64 {
        f64::from_bits(self.bound[c].load(Ordering::Relaxed))
    }

    fn tighten(&self, c: usize, sq: f64) {
        // Non-negative floats order like their bit patterns.
        self.bound[c].fetch_min(sq.to_bits(), Ordering::Relaxed);
    }

    fn query(&self, p: usize, stack: &mut Vec<(usize, f64)>) -> Option<Found> {
        let tree = self.tree;
        let cp = self.comp[p];
        let x = tree.point(p);
        let me = tree.index[p];
        let mut best: Option<Found> = None;
        let mut best_sq = f64::INFINITY;
        let mut exact = true;

        stack.clear();
        stack.push((0, tree.box_sq_dist(0, x)));
        while let Some((node, bd)) = stack.pop() {
            if bd > best_sq {
                continue;
            }
            if bd > self.bound(cp) {
                exact = false;
                continue;
            }
            let nd = tree.nodes[node];
            match nd.children {
                None => {
                    for q in nd.start..nd.end {
                        if self.comp[q] == cp {
                            continue;
                        }
                        let bound = self.bound(cp);
                        let limit = best_sq.min(bound);
                        let Some(sq) = sq_dist_bounded(x, tree.point(q), limit) else {
                            if bound < best_sq {
                                exact = false;
                            }
                            continue;
                        };
                        let key = EdgeKey::new(sq, me, tree.index[q]);
                        if best.is_none_or(|b| key < b.key) {
                            best = Some(Found { key, other: q, exact: true });
                            best_sq = sq;
                            self.tighten(cp, sq);
                        }
                    }
                }
                Some((l, r)) => {
                    let mut kids = [(l, 0.0), (r, 0.0)];
                    for k in kids.iter_mut() {
                        k.1 = if self.node_comp[k.0] == cp { f64::INFINITY } else { tree.box_sq_dist(k.0, x) };
                    }
                    if kids[0].1 < kids[1].1 {
                        kids.swap(0, 1);
                    }
                    for (child, cd) in kids {
                        if cd.is_finite() && cd <= best_sq {
                            stack.push((child, cd));
                        }
                    }
                }
            }
        }
        best.map(|b| Found { exact, ..b })
    }
}

pub(crate) fn kd_boruvka(cloud: &PointCloud) -> Vec<EdgeKey> {
    let n = cloud.n();
    let tree = KdTree::build(cloud);
    let mut uf = UnionFind::new(n);
    let mut edges: Vec<EdgeKey> = Vec::with_capacity(n - 1);
    let mut comp = vec![0usize; n];
    let mut node_comp = vec![MIXED; tree.nodes.len()];
    let mut cache: Vec<Option<Found>> = vec![None; n];
    let bound: Vec<AtomicU64> = (0..n).map(|_| AtomicU64::new(f64::INFINITY.to_bits())).collect();

    while edges.len() + 1 < n {
        for (p, c) in comp.iter_mut().enumerate() {
            *c = uf.find(p);
        }
        // Children always follow their parent in `nodes`, so a reverse sweep
        // is a post-order traversal.
        for id in (0..tree.nodes.len()).rev() {
            let nd = tree.nodes[id];
            node_comp[id] = match nd.children {
                Some((l, r)) if node_comp[l] == node_comp[r] => node_comp[l],
                Some(_) => MIXED,
                None => {
                    let c = comp[nd.start];
                    if comp[nd.start..nd.end].iter().all(|&x| x == c) {
                        c
                    } else {
                        MIXED
                    }
                }
            };
        }
        for b in &bound {
            b.store(f64::INFINITY.to_bits(), Ordering::Relaxed);
        }
        // Reuse still-valid cached neighbours and seed the bounds with them.
        let mut pending = Vec::new();
        for p in 0..n {
            match cache[p] {
                Some(f) if comp[f.other] != comp[p] => {
                    bound[comp[p]].fetch_min(f.key.sq.to_bits(), Ordering::Relaxed);
                }
                _ => {
                    cache[p] = None;
                    pending.push(p);
                }
            }
        }

        let round = Round { tree: &tree, comp: &comp, node_comp: &node_comp, bound: &bound };
        let chunks: Vec<&[usize]> = pending.chunks(256).collect();
        let found: Vec<Vec<(usize, Option<Found>)>> = par::map_slice(&chunks, |chunk| {
            let mut stack = Vec::with_capacity(64);
            chunk.iter().map(|&p| (p, round.query(p, &mut stack))).collect()
        });

        let mut best: Vec<Option<(EdgeKey, usize, usize)>> = vec![None; n];
        for (p, f) in found.into_iter().flatten() {
            if let Some(f) = f {
                if f.exact {
                    cache[p] = Some(f);
                }
                let slot = &mut best[comp[p]];
                if slot.is_none_or(|(k, _, _)| f.key < k) {
                    *slot = Some((f.key, p, f.other));
                }
            }
        }
        for p in 0..n {
            if let Some(f) = cache[p] {
                let slot = &mut best[comp[p]];
                if slot.is_none_or(|(k, _, _)| f.key < k) {
                    *slot = Some((f.key, p, f.other));
                }
            }
        }

        let before = edges.len();
        for (key, a, b) in best.into_iter().flatten() {
            if uf.union(a, b) {
                edges.push(key);
            }
        }
        assert!(edges.len() > before, "Borůvka round made no progress");
    }
    debug_assert!(edges.iter().all(|e| {
        let w = sq_dist(cloud.row(e.lo), cloud.row(e.hi));
        w.to_bits() == e.sq.to_bits()
    }));
    edges
}
