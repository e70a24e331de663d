//! Ward agglomerative clustering over stroke anchor points.
//!
//! The dendrogram is built with the nearest-neighbor chain algorithm. The
//! Ward dissimilarity between clusters `a` and `b` is evaluated directly
//! from their centroids,
//!
//! ```text
//! d(a, b)^2 = 2 · na · nb / (na + nb) · |ca - cb|^2
//! ```
//!
//! which is the closed form of the Lance-Williams Ward update, so two
//! singletons merge at their Euclidean distance. Only centroids and sizes are
//! kept, so memory stays linear in the number of strokes.
//!
//! Equal costs are ordered by the pair `(min id, max id)` of the clusters'
//! smallest stroke ids, which makes the merge order fully deterministic.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt::Write as _;

use rayon::prelude::*;
use thiserror::Error;

use crate::stroke::{Point, StrokeId, StrokeSet};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ClusterError {
    #[error("EmptySet: cannot cluster an empty stroke set")]
    EmptySet,
}

/// One row of the linkage matrix. Nodes `0..N` are leaves; merge `i`
/// creates node `N + i`. `left` is the child holding the smaller stroke id.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub height: f64,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dendrogram {
    leaves: Vec<StrokeId>,
    anchors: Vec<Point>,
    merges: Vec<Merge>,
}

/// Sort key of a candidate merge.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Cost {
    d2: f64,
    lo: usize,
    hi: usize,
}

impl Cost {
    fn cmp(&self, other: &Cost) -> Ordering {
        self.d2
            .total_cmp(&other.d2)
            .then(self.lo.cmp(&other.lo))
            .then(self.hi.cmp(&other.hi))
    }
}

struct Active {
    centroid: Point,
    size: usize,
    /// Smallest leaf index in the cluster.
    min_leaf: usize,
}

fn ward_d2(a: &Active, b: &Active) -> f64 {
    let (na, nb) = (a.size as f64, b.size as f64);
    let diff = a.centroid - b.centroid;
    2.0 * na * nb / (na + nb) * diff.dot(diff)
}

fn cost(a: &Active, b: &Active) -> Cost {
    Cost {
        d2: ward_d2(a, b),
        lo: a.min_leaf.min(b.min_leaf),
        hi: a.min_leaf.max(b.min_leaf),
    }
}

/// Scans at this size and above are split across threads.
const PARALLEL_SCAN: usize = 4096;

/// Raw merge found by the chain, before relabeling.
struct RawMerge {
    a: usize,
    b: usize,
    cost: Cost,
    size: usize,
}

impl Dendrogram {
    /// Ward dendrogram over `anchors`, leaf `i` carrying stroke id `i`.
    pub fn from_anchors(anchors: &[Point]) -> Result<Dendrogram, ClusterError> {
        let ids = (0..anchors.len() as u32).map(StrokeId).collect();
        Self::build(ids, anchors.to_vec())
    }

    fn build(leaves: Vec<StrokeId>, anchors: Vec<Point>) -> Result<Dendrogram, ClusterError> {
        let n = anchors.len();
        if n == 0 {
            return Err(ClusterError::EmptySet);
        }
        let raw = nn_chain(&anchors);
        let merges = relabel(n, &raw);
        Ok(Dendrogram {
            leaves,
            anchors,
            merges,
        })
    }

    /// Stroke ids of the leaves, ascending.
    pub fn leaves(&self) -> &[StrokeId] {
        &self.leaves
    }

    pub fn anchors(&self) -> &[Point] {
        &self.anchors
    }

    /// Merges in non-decreasing height order, `N - 1` of them.
    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves.len()
    }

    /// Linkage matrix as CSV with a `left,right,height,size` header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("left,right,height,size\n");
        for m in &self.merges {
            let _ = writeln!(out, "{},{},{},{}", m.left, m.right, m.height, m.size);
        }
        out
    }

    fn children(&self, node: usize) -> Option<(usize, usize)> {
        let n = self.leaf_count();
        (node >= n).then(|| {
            let m = &self.merges[node - n];
            (m.left, m.right)
        })
    }

    /// Leaves under `node`, left subtree first.
    fn leaf_order(&self, node: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![node];
        while let Some(v) = stack.pop() {
            match self.children(v) {
                Some((l, r)) => {
                    stack.push(r);
                    stack.push(l);
                }
                None => out.push(v),
            }
        }
        out
    }
}

/// Ward dendrogram of a stroke set over its anchor points. Leaves follow
/// ascending stroke id.
pub fn build_dendrogram(set: &StrokeSet) -> Result<Dendrogram, ClusterError> {
    let mut strokes: Vec<_> = set.strokes().iter().collect();
    strokes.sort_by_key(|s| s.id());
    let leaves = strokes.iter().map(|s| s.id()).collect();
    let anchors = strokes.iter().map(|s| s.anchor()).collect();
    Dendrogram::build(leaves, anchors)
}

fn nn_chain(anchors: &[Point]) -> Vec<RawMerge> {
    let n = anchors.len();
    let mut clusters: Vec<Option<Active>> = anchors
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            Some(Active {
                centroid: p,
                size: 1,
                min_leaf: i,
            })
        })
        .collect();
    clusters.reserve(n.saturating_sub(1));
    // Live cluster ids, and each id's slot in `live`.
    let mut live: Vec<usize> = (0..n).collect();
    let mut slot: Vec<usize> = (0..n).collect();
    slot.reserve(n.saturating_sub(1));

    let mut merges = Vec::with_capacity(n.saturating_sub(1));
    let mut chain: Vec<usize> = Vec::new();

    while live.len() > 1 {
        if chain.is_empty() {
            chain.push(live[0]);
        }
        let a = *chain.last().expect("chain is non-empty");
        let ca = clusters[a].as_ref().expect("chain holds live clusters");
        let scan =
            |&b: &usize| (b != a).then(|| (cost(ca, clusters[b].as_ref().expect("live")), b));
        let pick = |x: (Cost, usize), y: (Cost, usize)| {
            if y.0.cmp(&x.0) == Ordering::Less {
                y
            } else {
                x
            }
        };
        let (best_cost, b) = if live.len() >= PARALLEL_SCAN {
            live.par_iter()
                .filter_map(scan)
                .reduce_with(pick)
                .expect("at least two live clusters")
        } else {
            live.iter()
                .filter_map(scan)
                .reduce(pick)
                .expect("at least two live clusters")
        };

        if chain.len() >= 2 && chain[chain.len() - 2] == b {
            chain.truncate(chain.len() - 2);
            let x = clusters[a].take().expect("live");
            let y = clusters[b].take().expect("live");
            let size = x.size + y.size;
            let centroid =
                (x.centroid * x.size as f64 + y.centroid * y.size as f64) * (1.0 / size as f64);
            let id = clusters.len();
            clusters.push(Some(Active {
                centroid,
                size,
                min_leaf: x.min_leaf.min(y.min_leaf),
            }));
            for dead in [a, b] {
                let s = slot[dead];
                live.swap_remove(s);
                if s < live.len() {
                    slot[live[s]] = s;
                }
            }
            slot.push(live.len());
            live.push(id);
            merges.push(RawMerge {
                a,
                b,
                cost: best_cost,
                size,
            });
        } else {
            chain.push(b);
        }
    }
    merges
}

#[derive(PartialEq)]
struct Ready {
    cost: Cost,
    raw: usize,
}

impl Eq for Ready {}

impl PartialOrd for Ready {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Ready {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reversed: the heap pops the cheapest merge first.
        other.cost.cmp(&self.cost).then(other.raw.cmp(&self.raw))
    }
}

/// Orders the chain's merges by cost (respecting parent-after-child) and
/// renumbers internal nodes accordingly.
fn relabel(n: usize, raw: &[RawMerge]) -> Vec<Merge> {
    // Chain ids: leaves 0..n, raw merge k created id n + k.
    let mut parent_of = vec![usize::MAX; n + raw.len()];
    let mut pending = vec![2u8; raw.len()];
    let mut heap = BinaryHeap::new();
    let mut min_leaf = (0..n).collect::<Vec<_>>();
    min_leaf.resize(n + raw.len(), usize::MAX);
    for (k, m) in raw.iter().enumerate() {
        parent_of[m.a] = k;
        parent_of[m.b] = k;
        min_leaf[n + k] = min_leaf[m.a].min(min_leaf[m.b]);
        pending[k] = u8::from(m.a >= n) + u8::from(m.b >= n);
        if pending[k] == 0 {
            heap.push(Ready {
                cost: m.cost,
                raw: k,
            });
        }
    }

    let mut node_of = (0..n).collect::<Vec<_>>();
    node_of.resize(n + raw.len(), usize::MAX);
    let mut out = Vec::with_capacity(raw.len());
    while let Some(Ready { raw: k, .. }) = heap.pop() {
        let m = &raw[k];
        let (x, y) = if min_leaf[m.a] < min_leaf[m.b] {
            (m.a, m.b)
        } else {
            (m.b, m.a)
        };
        node_of[n + k] = n + out.len();
        out.push(Merge {
            left: node_of[x],
            right: node_of[y],
            height: m.cost.d2.sqrt(),
            size: m.size,
        });
        let p = parent_of[n + k];
        if p != usize::MAX {
            pending[p] -= 1;
            if pending[p] == 0 {
                heap.push(Ready {
                    cost: raw[p].cost,
                    raw: p,
                });
            }
        }
    }
    out
}

/// Strokes grouped into clusters. Cluster indices follow ascending smallest
/// member stroke id.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterPartition {
    leaves: Vec<StrokeId>,
    assignment: Vec<usize>,
    centroids: Vec<Point>,
    roots: Vec<usize>,
    order: Vec<Vec<StrokeId>>,
}

impl ClusterPartition {
    pub fn len(&self) -> usize {
        self.centroids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centroids.is_empty()
    }

    pub fn cluster_of(&self, id: StrokeId) -> Option<usize> {
        self.leaves
            .binary_search(&id)
            .ok()
            .map(|i| self.assignment[i])
    }

    /// `(stroke id, cluster)` pairs in ascending id order.
    pub fn assignments(&self) -> impl Iterator<Item = (StrokeId, usize)> + '_ {
        self.leaves
            .iter()
            .copied()
            .zip(self.assignment.iter().copied())
    }

    pub fn centroids(&self) -> &[Point] {
        &self.centroids
    }

    /// Member strokes of each cluster. Ascending id straight out of [`cut`];
    /// dendrogram leaf order after [`intra_order`].
    pub fn intra_order(&self) -> &[Vec<StrokeId>] {
        &self.order
    }
}

/// Cuts the dendrogram at `dist_prox`: every maximal subtree whose merges
/// all have height at most `dist_prox` is one cluster. A zero distance keeps
/// every stroke on its own, even when anchors coincide.
///
/// Panics if `dist_prox` is negative or NaN.
pub fn cut(dendrogram: &Dendrogram, dist_prox: f64) -> ClusterPartition {
    assert!(dist_prox >= 0.0, "dist_prox must be non-negative");
    let n = dendrogram.leaf_count();
    let merges = dendrogram.merges();
    // joined[k]: merge k lies entirely inside one cluster.
    let mut joined = vec![false; merges.len()];
    let mut root = vec![true; n + merges.len()];
    for (k, m) in merges.iter().enumerate() {
        let child_ok = |c: usize| c < n || joined[c - n];
        if dist_prox > 0.0 && m.height <= dist_prox && child_ok(m.left) && child_ok(m.right) {
            joined[k] = true;
            root[m.left] = false;
            root[m.right] = false;
        } else {
            root[n + k] = false;
        }
    }
    // A leaf whose parent merge was rejected stays a root; so does an
    // accepted merge whose parent was rejected.
    let mut clusters: Vec<(usize, Vec<usize>)> = (0..n + merges.len())
        .filter(|&v| root[v])
        .map(|v| {
            let mut members = dendrogram.leaf_order(v);
            members.sort_unstable();
            (v, members)
        })
        .collect();
    clusters.sort_by_key(|(_, members)| members[0]);

    let mut assignment = vec![0; n];
    let mut centroids = Vec::with_capacity(clusters.len());
    let mut roots = Vec::with_capacity(clusters.len());
    let mut order = Vec::with_capacity(clusters.len());
    for (index, (node, members)) in clusters.into_iter().enumerate() {
        let mut sum = Point::ORIGIN;
        for &leaf in &members {
            assignment[leaf] = index;
            sum = sum + dendrogram.anchors[leaf];
        }
        centroids.push(sum * (1.0 / members.len() as f64));
        roots.push(node);
        order.push(members.iter().map(|&l| dendrogram.leaves[l]).collect());
    }
    ClusterPartition {
        leaves: dendrogram.leaves.clone(),
        assignment,
        centroids,
        roots,
        order,
    }
}

/// Orders each cluster's strokes by a depth-first walk of its subtree, left
/// child first.
pub fn intra_order(dendrogram: &Dendrogram, partition: &ClusterPartition) -> ClusterPartition {
    let order = partition
        .roots
        .iter()
        .map(|&root| {
            dendrogram
                .leaf_order(root)
                .into_iter()
                .map(|leaf| dendrogram.leaves[leaf])
                .collect()
        })
        .collect();
    ClusterPartition {
        order,
        ..partition.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[(f64, f64)]) -> Vec<Point> {
        v.iter().map(|&(x, y)| Point::new(x, y)).collect()
    }

    #[test]
    fn two_points_merge_at_distance() {
        let d = Dendrogram::from_anchors(&pts(&[(0., 0.), (3., 4.)])).unwrap();
        assert_eq!(
            d.merges(),
            &[Merge {
                left: 0,
                right: 1,
                height: 5.0,
                size: 2
            }]
        );
    }

    #[test]
    fn three_points() {
        let d = Dendrogram::from_anchors(&pts(&[(0., 0.), (1., 0.), (10., 0.)])).unwrap();
        let m = d.merges();
        assert_eq!((m[0].left, m[0].right, m[0].height), (0, 1, 1.0));
        // ΔESS of joining {0,1} (centroid 0.5) with {10}: 2·1/3·9.5² ; height = sqrt(2·ΔESS).
        let expected = (2.0 * 2.0 / 3.0 * 9.5f64 * 9.5).sqrt();
        assert!((m[1].height - expected).abs() < 1e-12);
        assert_eq!((m[1].left, m[1].right, m[1].size), (3, 2, 3));
    }

    #[test]
    fn identical_anchors() {
        let d = Dendrogram::from_anchors(&pts(&[(2., 2.); 5])).unwrap();
        assert!(d.merges().iter().all(|m| m.height == 0.0));
        let p = intra_order(&d, &cut(&d, 1.0));
        assert_eq!(p.len(), 1);
        assert_eq!(p.intra_order()[0], (0..5).map(StrokeId).collect::<Vec<_>>());
    }

    #[test]
    fn empty_set() {
        assert_eq!(Dendrogram::from_anchors(&[]), Err(ClusterError::EmptySet));
        assert_eq!(
            build_dendrogram(&StrokeSet::empty(1, 1).unwrap()),
            Err(ClusterError::EmptySet)
        );
    }

    #[test]
    fn single_leaf() {
        let d = Dendrogram::from_anchors(&pts(&[(1., 1.)])).unwrap();
        assert!(d.merges().is_empty());
        let p = cut(&d, 5.0);
        assert_eq!(p.len(), 1);
        assert_eq!(p.centroids(), &[Point::new(1., 1.)]);
    }

    #[test]
    fn cut_two_pairs() {
        let d =
            Dendrogram::from_anchors(&pts(&[(0., 0.), (1., 0.), (100., 0.), (101., 0.)])).unwrap();
        let p = cut(&d, 10.0);
        assert_eq!(p.len(), 2);
        assert_eq!(p.centroids(), &[Point::new(0.5, 0.), Point::new(100.5, 0.)]);
        assert_eq!(p.intra_order()[1], vec![StrokeId(2), StrokeId(3)]);
        assert_eq!(cut(&d, 0.0).len(), 4);
        assert_eq!(cut(&d, f64::INFINITY).len(), 1);
    }

    #[test]
    fn leaf_order_within_cluster() {
        let d = Dendrogram::from_anchors(&pts(&[(5., 0.), (0., 0.), (1., 0.)])).unwrap();
        let p = intra_order(&d, &cut(&d, f64::INFINITY));
        assert_eq!(
            p.intra_order()[0],
            vec![StrokeId(0), StrokeId(1), StrokeId(2)]
        );
    }

    #[test]
    fn csv_dump() {
        let d = Dendrogram::from_anchors(&pts(&[(0., 0.), (3., 4.)])).unwrap();
        assert_eq!(d.to_csv(), "left,right,height,size\n0,1,5,2\n");
    }
}
