//! A static k-d tree over a point cloud, split at the median of the widest
//! bounding-box axis. Points are copied into tree order so every node owns a
//! contiguous block.

use crate::cloud::PointCloud;

pub(crate) const LEAF_SIZE: usize = 16;

#[derive(Clone, Copy, Debug)]
pub(crate) struct Node {
    pub start: usize,
    pub end: usize,
    /// Child node ids; `None` for leaves.
    pub children: Option<(usize, usize)>,
}

pub(crate) struct KdTree {
    pub d: usize,
    /// Coordinates in tree order.
    pub data: Vec<f64>,
    /// Tree position -> original point index.
    pub index: Vec<usize>,
    pub nodes: Vec<Node>,
    /// Per node: `d` lower bounds followed by `d` upper bounds.
    bounds: Vec<f64>,
}

impl KdTree {
    pub fn build(cloud: &PointCloud) -> KdTree {
        let d = cloud.d();
        let mut index: Vec<usize> = (0..cloud.n()).collect();
        let mut tree = KdTree {
            d,
            data: Vec::new(),
            index: Vec::new(),
            nodes: Vec::with_capacity(2 * cloud.n() / LEAF_SIZE + 1),
            bounds: Vec::new(),
        };
        tree.build_node(cloud, &mut index, 0);
        tree.data = Vec::with_capacity(cloud.n() * d);
        for &i in &index {
            tree.data.extend_from_slice(cloud.row(i));
        }
        tree.index = index;
        tree
    }

    fn build_node(&mut self, cloud: &PointCloud, index: &mut [usize], offset: usize) -> usize {
        let d = self.d;
        let id = self.nodes.len();
        self.nodes.push(Node { start: offset, end: offset + index.len(), children: None });
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for &i in index.iter() {
            for (k, &x) in cloud.row(i).iter().enumerate() {
                lo[k] = lo[k].min(x);
                hi[k] = hi[k].max(x);
            }
        }
        let (axis, width) =
            (0..d).map(|k| (k, hi[k] - lo[k])).fold((0, f64::NEG_INFINITY), |acc, c| if c.1 > acc.1 { c } else { acc });
        self.bounds.extend_from_slice(&lo);
        self.bounds.extend_from_slice(&hi);

        if index.len() > LEAF_SIZE && width > 0.0 {
            let mid = index.len() / 2;
            index.select_nth_unstable_by(mid, |&a, &b| {
                cloud.row(a)[axis].total_cmp(&cloud.row(b)[axis]).then(a.cmp(&b))
            });
            let (left, right) = index.split_at_mut(mid);
            let l = self.build_node(cloud, left, offset);
            let r = self.build_node(cloud, right, offset + mid);
            self.nodes[id].children = Some((l, r));
        }
        id
    }

    #[inline]
    pub fn point(&self, pos: usize) -> &[f64] {
        &self.data[pos * self.d..(pos + 1) * self.d]
    }

    /// Squared distance from `x` to the bounding box of `node`.
    #[inline]
    pub fn box_sq_dist(&self, node: usize, x: &[f64]) -> f64 {
        let b = &self.bounds[2 * self.d * node..2 * self.d * (node + 1)];
        let (lo, hi) = b.split_at(self.d);
        let mut s = 0.0;
        for k in 0..self.d {
            let g = if x[k] < lo[k] {
                lo[k] - x[k]
            } else if x[k] > hi[k] {
                x[k] - hi[k]
            } else {
                0.0
            };
            s += g * g;
        }
        s
    }
}
