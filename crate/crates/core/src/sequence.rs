//! Cluster visiting order and the per-stream stroke sequence.
//!
//! Clusters are ordered by a closed tour over their centroids: exact
//! Held-Karp for small instances, nearest neighbor followed by 2-opt above
//! that. The cycle is then opened into a drawing order.

use std::fmt::Write as _;

use crate::cluster::ClusterPartition;
use crate::stroke::{Point, Stream, StrokeId};

pub const DEFAULT_EXACT_MAX: usize = 15;
/// Largest instance Held-Karp accepts; its table grows as `2^M · M`.
pub const HELD_KARP_LIMIT: usize = 20;

/// 2-opt only applies moves that shorten the tour by more than this.
const IMPROVEMENT_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Tour {
    /// Cluster indices in visiting order, starting at cluster 0.
    pub order: Vec<usize>,
    /// Cycle length, closing edge included.
    pub length: f64,
}

impl Tour {
    fn new(order: Vec<usize>, centroids: &[Point]) -> Tour {
        let length = tour_length(&order, centroids);
        Tour { order, length }
    }

    /// CSV of `cluster,cumulative_length`; the closing edge is the last row's
    /// total minus the previous one.
    pub fn to_csv(&self, centroids: &[Point]) -> String {
        let mut out = String::from("cluster,cumulative_length\n");
        let mut acc = 0.0;
        for (i, &c) in self.order.iter().enumerate() {
            if i > 0 {
                acc += centroids[self.order[i - 1]].distance(centroids[c]);
            }
            let _ = writeln!(out, "{c},{acc}");
        }
        if let (Some(&first), Some(&last)) = (self.order.first(), self.order.last()) {
            if self.order.len() > 1 {
                acc += centroids[last].distance(centroids[first]);
            }
            let _ = writeln!(out, "{first},{acc}");
        }
        out
    }
}

/// Length of the closed cycle through `order`.
pub fn tour_length(order: &[usize], centroids: &[Point]) -> f64 {
    if order.len() < 2 {
        return 0.0;
    }
    let mut total = 0.0;
    for w in order.windows(2) {
        total += centroids[w[0]].distance(centroids[w[1]]);
    }
    total + centroids[order[order.len() - 1]].distance(centroids[order[0]])
}

/// Shortest closed tour for up to `exact_max` centroids, a 2-opt improved
/// nearest-neighbor tour otherwise.
///
/// Panics on an empty centroid list or when `exact_max` is outside
/// `3..=HELD_KARP_LIMIT`.
pub fn solve_tsp(centroids: &[Point], exact_max: usize) -> Tour {
    assert!(!centroids.is_empty(), "tour needs at least one centroid");
    assert!(
        (3..=HELD_KARP_LIMIT).contains(&exact_max),
        "exact_max must be in [3, {HELD_KARP_LIMIT}]"
    );
    if centroids.len() <= exact_max {
        held_karp(centroids)
    } else {
        let seed = nearest_neighbor_tour(centroids);
        two_opt(centroids, &seed)
    }
}

/// Exact Held-Karp dynamic program rooted at cluster 0.
pub fn held_karp(centroids: &[Point]) -> Tour {
    let m = centroids.len();
    assert!(
        (1..=HELD_KARP_LIMIT).contains(&m),
        "held_karp supports 1..={HELD_KARP_LIMIT} points"
    );
    if m <= 3 {
        return Tour::new((0..m).collect(), centroids);
    }
    let dist = |i: usize, j: usize| centroids[i].distance(centroids[j]);
    // Subsets over nodes 1..m, bit (j - 1) for node j. cost[mask * k + (j - 1)]
    // is the shortest path from 0 through `mask` ending at j.
    let k = m - 1;
    let full = 1usize << k;
    let mut cost = vec![f64::INFINITY; full * k];
    let mut prev = vec![u8::MAX; full * k];
    for j in 0..k {
        cost[(1 << j) * k + j] = dist(0, j + 1);
    }
    for mask in 1..full {
        for j in 0..k {
            if mask & (1 << j) == 0 {
                continue;
            }
            let here = cost[mask * k + j];
            if !here.is_finite() {
                continue;
            }
            for next in 0..k {
                if mask & (1 << next) != 0 {
                    continue;
                }
                let to = (mask | (1 << next)) * k + next;
                let cand = here + dist(j + 1, next + 1);
                if cand < cost[to] {
                    cost[to] = cand;
                    prev[to] = j as u8;
                }
            }
        }
    }
    let last_mask = full - 1;
    let mut best = (f64::INFINITY, 0);
    for j in 0..k {
        let total = cost[last_mask * k + j] + dist(j + 1, 0);
        if total < best.0 {
            best = (total, j);
        }
    }
    let mut order = Vec::with_capacity(m);
    let (mut mask, mut j) = (last_mask, best.1);
    loop {
        order.push(j + 1);
        let p = prev[mask * k + j];
        mask &= !(1 << j);
        if p == u8::MAX {
            break;
        }
        j = p as usize;
    }
    order.push(0);
    order.reverse();
    Tour::new(order, centroids)
}

/// Greedy tour from cluster 0; ties go to the lower index.
pub fn nearest_neighbor_tour(centroids: &[Point]) -> Tour {
    let m = centroids.len();
    let mut visited = vec![false; m];
    let mut order = Vec::with_capacity(m);
    let mut current = 0;
    visited[0] = true;
    order.push(0);
    for _ in 1..m {
        let mut best: Option<(f64, usize)> = None;
        for (j, seen) in visited.iter().enumerate() {
            if *seen {
                continue;
            }
            let d = centroids[current].distance(centroids[j]);
            if best.map_or(true, |(bd, _)| d < bd) {
                best = Some((d, j));
            }
        }
        let (_, j) = best.expect("unvisited node remains");
        visited[j] = true;
        order.push(j);
        current = j;
    }
    Tour::new(order, centroids)
}

/// First-improvement 2-opt: scans edge pairs in index order, applies the
/// first shortening reversal found, and stops after a full pass without one.
pub fn two_opt(centroids: &[Point], tour: &Tour) -> Tour {
    let mut order = tour.order.clone();
    let m = order.len();
    if m < 4 {
        return Tour::new(order, centroids);
    }
    let d = |a: usize, b: usize| centroids[a].distance(centroids[b]);
    let mut improved = true;
    while improved {
        improved = false;
        for i in 0..m - 1 {
            for j in i + 2..m {
                if i == 0 && j == m - 1 {
                    continue;
                }
                let (a, b) = (order[i], order[i + 1]);
                let (c, e) = (order[j], order[(j + 1) % m]);
                let delta = d(a, c) + d(b, e) - d(a, b) - d(c, e);
                if delta < -IMPROVEMENT_EPS {
                    order[i + 1..=j].reverse();
                    improved = true;
                }
            }
        }
    }
    Tour::new(order, centroids)
}

/// Opens the cycle into a path. The path starts at the centroid nearest the
/// canvas origin and heads toward the nearer of its two tour neighbors; ties
/// go to the lower cluster index in both choices.
pub fn linearize(tour: &Tour, centroids: &[Point]) -> Vec<usize> {
    let m = tour.order.len();
    if m == 0 {
        return Vec::new();
    }
    let start = tour
        .order
        .iter()
        .copied()
        .min_by(|&a, &b| {
            centroids[a]
                .length()
                .total_cmp(&centroids[b].length())
                .then(a.cmp(&b))
        })
        .expect("non-empty tour");
    let pos = tour
        .order
        .iter()
        .position(|&c| c == start)
        .expect("start is on the tour");
    let next = tour.order[(pos + 1) % m];
    let prev = tour.order[(pos + m - 1) % m];
    let dn = centroids[start].distance(centroids[next]);
    let dp = centroids[start].distance(centroids[prev]);
    let forward = dn < dp || (dn == dp && next <= prev);
    (0..m)
        .map(|i| {
            if forward {
                tour.order[(pos + i) % m]
            } else {
                tour.order[(pos + m - i) % m]
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SequenceEntry {
    pub stroke: StrokeId,
    pub cluster: usize,
    pub rank: usize,
}

/// One stream's strokes in drawing order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrokeSequence {
    entries: Vec<SequenceEntry>,
    stream: Stream,
}

impl StrokeSequence {
    pub fn empty(stream: Stream) -> StrokeSequence {
        StrokeSequence {
            entries: Vec::new(),
            stream,
        }
    }

    pub fn entries(&self) -> &[SequenceEntry] {
        &self.entries
    }

    pub fn stream(&self) -> Stream {
        self.stream
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn stroke_ids(&self) -> impl Iterator<Item = StrokeId> + '_ {
        self.entries.iter().map(|e| e.stroke)
    }

    /// Shifts every rank and cluster index, for placing a stream after
    /// another in a combined sequence.
    pub fn offset(mut self, rank: usize, cluster: usize) -> StrokeSequence {
        for e in &mut self.entries {
            e.rank += rank;
            e.cluster += cluster;
        }
        self
    }
}

/// Concatenates each cluster's intra-cluster order in `linearized` order.
///
/// Panics unless `linearized` names every cluster exactly once.
pub fn assemble(
    linearized: &[usize],
    partition: &ClusterPartition,
    stream: Stream,
) -> StrokeSequence {
    let mut seen = vec![false; partition.len()];
    assert_eq!(
        linearized.len(),
        partition.len(),
        "linearized order must cover every cluster"
    );
    let mut entries = Vec::new();
    for &c in linearized {
        assert!(
            !std::mem::replace(&mut seen[c], true),
            "cluster {c} listed twice"
        );
        for &stroke in &partition.intra_order()[c] {
            entries.push(SequenceEntry {
                stroke,
                cluster: c,
                rank: entries.len(),
            });
        }
    }
    StrokeSequence { entries, stream }
}
