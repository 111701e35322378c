//! Dense Prim: `O(n²)` distance evaluations, no index. This is the reference
//! path the spatial-index construction is checked against, and the faster of
//! the two for small or very high-dimensional clouds.

use super::{sq_dist, EdgeKey};
use crate::cloud::PointCloud;

pub(crate) fn prim(cloud: &PointCloud) -> Vec<EdgeKey> {
    let n = cloud.n();
    let mut edges = Vec::with_capacity(n.saturating_sub(1));
    // Vertices not yet in the tree, with the best edge connecting each to it.
    let mut remaining: Vec<usize> = (1..n).collect();
    let mut best: Vec<EdgeKey> = vec![EdgeKey::INFINITE; n];
    let mut current = 0usize;
    while !remaining.is_empty() {
        let x = cloud.row(current);
        let mut pick = 0usize;
        for (slot, &v) in remaining.iter().enumerate() {
            let cand = EdgeKey::new(sq_dist(x, cloud.row(v)), current, v);
            if cand < best[v] {
                best[v] = cand;
            }
            if best[v] < best[remaining[pick]] {
                pick = slot;
            }
        }
        let v = remaining.swap_remove(pick);
        edges.push(best[v]);
        current = v;
    }
    edges
}
