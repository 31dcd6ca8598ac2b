//! Random recursive trees with exponential edge clocks and the cutting-merge
//! dynamics that turn them into the Bolthausen–Sznitman coalescent.

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use super::rep_rng;

/// A uniform random recursive tree on nodes `0..n` (node `k` carries label
/// `k + 1`) with an exponential clock on every edge. Node 0 is the root;
/// `parent[0]` is 0 and `edge_time[0]` is infinite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecursiveTreeSample {
    pub parent: Vec<usize>,
    pub edge_time: Vec<f64>,
}

impl RecursiveTreeSample {
    pub fn n(&self) -> usize {
        self.parent.len()
    }

    fn children(&self) -> Vec<Vec<usize>> {
        let mut ch = vec![Vec::new(); self.n()];
        for v in 1..self.n() {
            ch[self.parent[v]].push(v);
        }
        ch
    }
}

/// Draws a tree with the generator for replicate 0 of `seed`.
pub fn sample_tree(n: usize, seed: u64) -> RecursiveTreeSample {
    sample_tree_with(n, &mut rep_rng(seed, 0))
}

pub fn sample_tree_with<R: Rng + ?Sized>(n: usize, rng: &mut R) -> RecursiveTreeSample {
    assert!(n >= 1, "a tree needs at least one node");
    let mut parent = vec![0; n];
    let mut edge_time = vec![f64::INFINITY; n];
    for v in 1..n {
        parent[v] = rng.random_range(0..v);
        edge_time[v] = Exp1.sample(rng);
    }
    RecursiveTreeSample { parent, edge_time }
}

/// A recursive tree whose nodes carry blocks of labels, supporting the
/// cutting-merge operation.
#[derive(Debug, Clone, PartialEq)]
pub struct CutMergeTree {
    labels: Vec<Vec<usize>>,
    parent: Vec<Option<usize>>,
    alive: Vec<bool>,
}

impl CutMergeTree {
    /// Builds a tree from label blocks and parent links (`None` for the root).
    pub fn new(labels: Vec<Vec<usize>>, parent: Vec<Option<usize>>) -> Self {
        assert_eq!(labels.len(), parent.len());
        let alive = vec![true; labels.len()];
        Self {
            labels,
            parent,
            alive,
        }
    }

    pub fn from_sample(tree: &RecursiveTreeSample) -> Self {
        let labels = (0..tree.n()).map(|k| vec![k + 1]).collect();
        let parent = (0..tree.n())
            .map(|k| (k > 0).then_some(tree.parent[k]))
            .collect();
        Self::new(labels, parent)
    }

    pub fn is_alive(&self, node: usize) -> bool {
        self.alive[node]
    }

    fn in_subtree(&self, node: usize, root: usize) -> bool {
        let mut v = node;
        loop {
            if v == root {
                return true;
            }
            match self.parent[v] {
                Some(p) => v = p,
                None => return false,
            }
        }
    }

    /// Cuts the edge above `node` and merges every label of its subtree into
    /// the parent. Returns the sizes of the merged blocks (parent first) or
    /// `None` if the edge is no longer present.
    pub fn cut(&mut self, node: usize) -> Option<Vec<usize>> {
        if !self.alive[node] {
            return None;
        }
        let parent = self.parent[node]?;
        let members: Vec<usize> = (0..self.labels.len())
            .filter(|&v| self.alive[v] && self.in_subtree(v, node))
            .collect();
        let mut sizes = vec![self.labels[parent].len()];
        let mut moved = Vec::new();
        for v in members {
            sizes.push(self.labels[v].len());
            moved.append(&mut self.labels[v]);
            self.alive[v] = false;
        }
        self.labels[parent].extend(moved);
        self.labels[parent].sort_unstable();
        Some(sizes)
    }

    /// Current blocks ordered by least element.
    pub fn partition(&self) -> Vec<Vec<usize>> {
        let mut blocks: Vec<Vec<usize>> = (0..self.labels.len())
            .filter(|&v| self.alive[v])
            .map(|v| self.labels[v].clone())
            .collect();
        for b in &mut blocks {
            b.sort_unstable();
        }
        blocks.sort_by_key(|b| b[0]);
        blocks
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        (0..self.labels.len())
            .filter(|&v| self.alive[v])
            .map(|v| self.labels[v].len())
            .collect()
    }
}

/// The ten-label tree of the cutting-merge illustration, together with the
/// node whose edge is marked:
///
/// ```text
/// {1,3} ─┬─ {4} ─┬─ {5,7}
///        │       ├─ {6} ── {8,10}     (marked edge {4}–{6})
///        │       └─ {9}
///        └─ {2}
/// ```
pub fn figure_two_fixture() -> (CutMergeTree, usize) {
    let labels = vec![
        vec![1, 3],
        vec![4],
        vec![2],
        vec![5, 7],
        vec![6],
        vec![9],
        vec![8, 10],
    ];
    let parent = vec![None, Some(0), Some(0), Some(1), Some(1), Some(1), Some(4)];
    (CutMergeTree::new(labels, parent), 4)
}

/// One merger: the sizes of the merging blocks and the time it happens.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MergeEvent {
    pub time: f64,
    /// Sizes of the blocks that merge, in decreasing order.
    pub merged: Vec<usize>,
}

/// The coalescent path generated by one tree. `counts[i][b]` is the number
/// of blocks of size `b` after `i` events, so `counts[i]` holds on the
/// interval between event `i − 1` (or time 0) and event `i`; the last entry
/// is the absorbing state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockTrajectory {
    pub n: usize,
    pub events: Vec<MergeEvent>,
    pub counts: Vec<Vec<u32>>,
}

impl BlockTrajectory {
    /// `ℓ_{n,b}` for `b = 1..n−1`, at index `b − 1`.
    pub fn lengths(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n.saturating_sub(1)];
        let mut prev = 0.0;
        for (i, e) in self.events.iter().enumerate() {
            let dt = e.time - prev;
            for (b, &c) in self.counts[i].iter().enumerate().take(self.n).skip(1) {
                out[b - 1] += dt * c as f64;
            }
            prev = e.time;
        }
        out
    }

    pub fn absorption_time(&self) -> f64 {
        self.events.last().map_or(0.0, |e| e.time)
    }
}

fn size_counts(sizes: &[usize], n: usize) -> Vec<u32> {
    let mut c = vec![0; n + 1];
    for &s in sizes {
        c[s] += 1;
    }
    c
}

/// Runs the cutting-merge procedure on every edge in increasing clock order.
/// An edge whose node has already been swept into an ancestor never fires.
pub fn trajectory(tree: &RecursiveTreeSample) -> BlockTrajectory {
    let n = tree.n();
    let mut order: Vec<usize> = (1..n).collect();
    order.sort_by(|&a, &b| tree.edge_time[a].total_cmp(&tree.edge_time[b]));
    let mut cm = CutMergeTree::from_sample(tree);
    let mut events = Vec::new();
    let mut counts = vec![size_counts(&cm.block_sizes(), n)];
    for v in order {
        if let Some(mut merged) = cm.cut(v) {
            merged.sort_unstable_by(|a, b| b.cmp(a));
            events.push(MergeEvent {
                time: tree.edge_time[v],
                merged,
            });
            counts.push(size_counts(&cm.block_sizes(), n));
        }
    }
    BlockTrajectory { n, events, counts }
}

/// Block sizes at time `t`, in decreasing order.
pub fn partition_at(tree: &RecursiveTreeSample, t: f64) -> Vec<usize> {
    let mut order: Vec<usize> = (1..tree.n()).filter(|&v| tree.edge_time[v] <= t).collect();
    order.sort_by(|&a, &b| tree.edge_time[a].total_cmp(&tree.edge_time[b]));
    let mut cm = CutMergeTree::from_sample(tree);
    for v in order {
        cm.cut(v);
    }
    let mut s = cm.block_sizes();
    s.sort_unstable_by(|a, b| b.cmp(a));
    s
}

/// `ℓ_{n,b}` for `b = 1..n−1` (index `b − 1`) in `O(n log n)`.
///
/// Node `u` is alive until `d(u) = min(E_u, d(parent u))`. While alive its
/// block grows by the subtree size of each child whose clock rings before
/// `d(u)`; summing the time spent at each size gives the lengths.
pub fn branch_lengths(tree: &RecursiveTreeSample) -> Vec<f64> {
    let n = tree.n();
    let mut out = vec![0.0; n.saturating_sub(1)];
    if n < 2 {
        return out;
    }
    let mut death = vec![f64::INFINITY; n];
    for v in 1..n {
        death[v] = tree.edge_time[v].min(death[tree.parent[v]]);
    }
    let mut subtree = vec![1usize; n];
    for v in (1..n).rev() {
        subtree[tree.parent[v]] += subtree[v];
    }
    let children = tree.children();
    let mut firing: Vec<(f64, usize)> = Vec::new();
    for u in 0..n {
        firing.clear();
        firing.extend(
            children[u]
                .iter()
                .filter(|&&c| tree.edge_time[c] < death[u])
                .map(|&c| (tree.edge_time[c], subtree[c])),
        );
        firing.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut size = 1;
        let mut since = 0.0;
        for &(t, add) in &firing {
            out[size - 1] += t - since;
            size += add;
            since = t;
        }
        if size < n {
            out[size - 1] += death[u] - since;
        }
    }
    out
}

/// Time until a single block remains: the largest clock among root edges.
pub fn absorption_time(tree: &RecursiveTreeSample) -> f64 {
    (1..tree.n())
        .filter(|&v| tree.parent[v] == 0)
        .map(|v| tree.edge_time[v])
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_node_tree() {
        for seed in 0..20 {
            let t = sample_tree(2, seed);
            assert_eq!(t.parent[1], 0);
            let traj = trajectory(&t);
            assert_eq!(traj.events.len(), 1);
            assert_eq!(traj.events[0].time, t.edge_time[1]);
            assert!((traj.lengths()[0] - 2.0 * t.edge_time[1]).abs() < 1e-15);
            assert!((branch_lengths(&t)[0] - 2.0 * t.edge_time[1]).abs() < 1e-15);
        }
    }

    #[test]
    fn recursive_property_and_determinism() {
        let a = sample_tree(50, 7);
        assert!((1..50).all(|v| a.parent[v] < v));
        assert!(a.edge_time[1..].iter().all(|&e| e > 0.0 && e.is_finite()));
        assert_eq!(a, sample_tree(50, 7));
        assert_ne!(a, sample_tree(50, 8));
    }

    #[test]
    fn figure_two_cut() {
        let (mut tree, marked) = figure_two_fixture();
        let sizes = tree.cut(marked).unwrap();
        assert_eq!(sizes, vec![1, 1, 2]);
        let want: Vec<Vec<usize>> =
            vec![vec![1, 3], vec![2], vec![4, 6, 8, 10], vec![5, 7], vec![9]];
        assert_eq!(tree.partition(), want);
        assert!(tree.cut(marked).is_none());
    }

    #[test]
    fn trajectory_invariants() {
        for seed in 0..200 {
            let n = 2 + (seed as usize % 30);
            let t = sample_tree(n, seed);
            let traj = trajectory(&t);
            assert!(traj.events.len() < n);
            for c in &traj.counts {
                let mass: usize = c.iter().enumerate().map(|(b, &k)| b * k as usize).sum();
                assert_eq!(mass, n);
            }
            let last = traj.counts.last().unwrap();
            assert_eq!(last[n], 1);
            assert!(traj.events.windows(2).all(|w| w[0].time < w[1].time));
            let fast = branch_lengths(&t);
            for (a, b) in fast.iter().zip(traj.lengths()) {
                assert!((a - b).abs() < 1e-12 * (1.0 + b), "seed {seed}");
            }
            assert_eq!(absorption_time(&t), traj.absorption_time());
            let mass: f64 = fast
                .iter()
                .enumerate()
                .map(|(i, l)| (i + 1) as f64 * l)
                .sum();
            assert!((mass - n as f64 * traj.absorption_time()).abs() < 1e-10 * mass);
        }
    }

    #[test]
    fn multiple_mergers_occur() {
        let found = (0..500).any(|seed| {
            trajectory(&sample_tree(10, seed))
                .events
                .iter()
                .any(|e| e.merged.len() > 2)
        });
        assert!(found);
    }

    #[test]
    fn partition_at_matches_trajectory() {
        let t = sample_tree(12, 3);
        let traj = trajectory(&t);
        for (i, e) in traj.events.iter().enumerate() {
            let sizes = partition_at(&t, e.time);
            assert_eq!(size_counts(&sizes, 12), traj.counts[i + 1]);
        }
        assert_eq!(partition_at(&t, 0.0), vec![1; 12]);
    }
}
