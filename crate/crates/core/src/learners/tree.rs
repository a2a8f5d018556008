//! CART-style decision tree: Gini impurity for classification, squared error
//! for regression, optional reduced-error pruning.
//!
//! Split search visits features in ascending index order and thresholds in
//! ascending order and only replaces the incumbent on a strictly better
//! score, so ties resolve to the lowest feature index, then lowest threshold.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::encode::{Column, Columns};
use super::{argmax, RawOutput, Targets, TreeParams};
use crate::rng::{self, Rng};

/// Share of the training rows held out for reduced-error pruning.
const PRUNE_HOLDOUT: f64 = 0.2;
/// Below this many rows the tree is grown on everything and left unpruned.
const MIN_ROWS_FOR_PRUNING: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub(crate) enum NodeValue {
    Class(Vec<u32>),
    Mean(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub(crate) enum Test {
    LessEq(f64),
    Equals(u32),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub(crate) struct Split {
    feature: usize,
    test: Test,
    left: usize,
    right: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub(crate) struct Node {
    value: NodeValue,
    split: Option<Split>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub(crate) struct Tree {
    nodes: Vec<Node>,
}

pub(crate) struct GrowParams {
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    /// Features sampled per split; `None` considers all of them.
    pub max_features: Option<usize>,
}

pub(crate) fn fit_decision_tree(cols: &Columns, targets: &Targets, p: &TreeParams, seed: u64) -> Tree {
    let params = GrowParams {
        max_depth: p.max_depth,
        min_leaf: p.min_samples_leaf,
        max_features: None,
    };
    let n = targets.len();
    if p.pruning && n >= MIN_ROWS_FOR_PRUNING {
        let (grow_rows, holdout) = pruning_split(n, seed);
        let mut tree = Tree::grow(cols, targets, grow_rows, &params, None);
        tree.prune(cols, targets, &holdout);
        tree
    } else {
        Tree::grow(cols, targets, (0..n).collect(), &params, None)
    }
}

/// Node counts before and after pruning, for a tree grown on the pruning
/// split that `fit_decision_tree` would use.
pub(crate) fn node_counts(cols: &Columns, targets: &Targets, p: &TreeParams, seed: u64) -> (usize, usize) {
    let params = GrowParams {
        max_depth: p.max_depth,
        min_leaf: p.min_samples_leaf,
        max_features: None,
    };
    let n = targets.len();
    let (grow_rows, holdout) = if n >= MIN_ROWS_FOR_PRUNING {
        pruning_split(n, seed)
    } else {
        ((0..n).collect(), Vec::new())
    };
    let mut tree = Tree::grow(cols, targets, grow_rows, &params, None);
    let before = tree.node_count();
    tree.prune(cols, targets, &holdout);
    (before, tree.node_count())
}

fn pruning_split(n: usize, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng::seeded(seed));
    let n_hold = rng::round_half_up(PRUNE_HOLDOUT * n as f64).max(1);
    let mut holdout = order[..n_hold].to_vec();
    let mut grow = order[n_hold..].to_vec();
    holdout.sort_unstable();
    grow.sort_unstable();
    (grow, holdout)
}

fn goes_left(col: &Column, row: usize, test: Test) -> bool {
    match (col, test) {
        (Column::Num(xs), Test::LessEq(t)) => xs[row] <= t,
        (Column::Cat { values, .. }, Test::Equals(c)) => values[row] == c,
        _ => unreachable!("test kind follows column kind"),
    }
}

fn node_value(targets: &Targets, rows: &[usize]) -> NodeValue {
    match targets {
        Targets::Class { y, n_classes } => {
            let mut counts = alloc::vec![0u32; *n_classes];
            for &r in rows {
                counts[y[r] as usize] += 1;
            }
            NodeValue::Class(counts)
        }
        Targets::Reg(y) => {
            let sum: f64 = rows.iter().map(|&r| y[r]).sum();
            NodeValue::Mean(sum / rows.len() as f64)
        }
    }
}

fn is_pure(targets: &Targets, rows: &[usize]) -> bool {
    match targets {
        Targets::Class { y, .. } => rows.iter().all(|&r| y[r] == y[rows[0]]),
        Targets::Reg(y) => rows.iter().all(|&r| y[r] == y[rows[0]]),
    }
}

/// Impurity accumulator for one side of a split. Scores are totals (n·Gini
/// or sum of squared errors) so that two sides add up directly.
#[derive(Clone)]
enum Side {
    Class { counts: Vec<u32>, n: u32 },
    Reg { sum: f64, sumsq: f64, n: u32 },
}

impl Side {
    fn empty(targets: &Targets) -> Side {
        match targets {
            Targets::Class { n_classes, .. } => Side::Class {
                counts: alloc::vec![0; *n_classes],
                n: 0,
            },
            Targets::Reg(_) => Side::Reg {
                sum: 0.0,
                sumsq: 0.0,
                n: 0,
            },
        }
    }

    fn add(&mut self, targets: &Targets, row: usize, sign: i32) {
        match (self, targets) {
            (Side::Class { counts, n }, Targets::Class { y, .. }) => {
                let c = &mut counts[y[row] as usize];
                *c = (*c as i32 + sign) as u32;
                *n = (*n as i32 + sign) as u32;
            }
            (Side::Reg { sum, sumsq, n }, Targets::Reg(y)) => {
                let v = y[row];
                *sum += sign as f64 * v;
                *sumsq += sign as f64 * v * v;
                *n = (*n as i32 + sign) as u32;
            }
            _ => unreachable!(),
        }
    }

    fn n(&self) -> usize {
        match self {
            Side::Class { n, .. } | Side::Reg { n, .. } => *n as usize,
        }
    }

    fn score(&self) -> f64 {
        match self {
            Side::Class { counts, n } => {
                if *n == 0 {
                    return 0.0;
                }
                let n = *n as f64;
                let sq: f64 = counts.iter().map(|&c| (c as f64) * (c as f64)).sum();
                n - sq / n
            }
            Side::Reg { sum, sumsq, n } => {
                if *n == 0 {
                    return 0.0;
                }
                (sumsq - sum * sum / *n as f64).max(0.0)
            }
        }
    }
}

struct Grower<'a> {
    cols: &'a Columns,
    targets: &'a Targets,
    params: &'a GrowParams,
    rng: Option<&'a mut Rng>,
    nodes: Vec<Node>,
}

struct Candidate {
    score: f64,
    feature: usize,
    test: Test,
}

impl Tree {
    pub(crate) fn grow(
        cols: &Columns,
        targets: &Targets,
        rows: Vec<usize>,
        params: &GrowParams,
        rng: Option<&mut Rng>,
    ) -> Tree {
        let mut g = Grower {
            cols,
            targets,
            params,
            rng,
            nodes: Vec::new(),
        };
        g.build(rows, 0);
        Tree { nodes: g.nodes }
    }

    pub(crate) fn node_count(&self) -> usize {
        self.nodes.len()
    }

    fn leaf_of(&self, cols: &Columns, row: usize) -> &Node {
        let mut node = &self.nodes[0];
        while let Some(s) = &node.split {
            node = if goes_left(&cols[s.feature], row, s.test) {
                &self.nodes[s.left]
            } else {
                &self.nodes[s.right]
            };
        }
        node
    }

    /// Normalized class distribution for classifiers, mean for regressors.
    pub(crate) fn predict_row(&self, cols: &Columns, row: usize) -> LeafOutput {
        match &self.leaf_of(cols, row).value {
            NodeValue::Class(counts) => {
                let total: u32 = counts.iter().sum();
                LeafOutput::Dist(counts.iter().map(|&c| c as f64 / total as f64).collect())
            }
            NodeValue::Mean(m) => LeafOutput::Mean(*m),
        }
    }

    pub(crate) fn predict(&self, cols: &Columns, n_rows: usize) -> RawOutput {
        match &self.nodes[0].value {
            NodeValue::Class(_) => RawOutput::Class(
                (0..n_rows)
                    .map(|r| match self.predict_row(cols, r) {
                        LeafOutput::Dist(d) => d,
                        LeafOutput::Mean(_) => unreachable!(),
                    })
                    .collect(),
            ),
            NodeValue::Mean(_) => RawOutput::Reg(
                (0..n_rows)
                    .map(|r| match self.predict_row(cols, r) {
                        LeafOutput::Mean(m) => m,
                        LeafOutput::Dist(_) => unreachable!(),
                    })
                    .collect(),
            ),
        }
    }

    /// Reduced-error pruning: bottom-up, a subtree becomes a leaf whenever
    /// that does not increase the error on `holdout`.
    fn prune(&mut self, cols: &Columns, targets: &Targets, holdout: &[usize]) {
        self.prune_node(0, holdout.to_vec(), cols, targets);
        self.compact();
    }

    fn leaf_error(&self, id: usize, rows: &[usize], targets: &Targets) -> f64 {
        match (&self.nodes[id].value, targets) {
            (NodeValue::Class(counts), Targets::Class { y, .. }) => {
                let counts: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
                let guess = argmax(&counts);
                rows.iter().filter(|&&r| y[r] != guess).count() as f64
            }
            (NodeValue::Mean(m), Targets::Reg(y)) => rows.iter().map(|&r| (y[r] - m) * (y[r] - m)).sum(),
            _ => unreachable!(),
        }
    }

    fn prune_node(&mut self, id: usize, rows: Vec<usize>, cols: &Columns, targets: &Targets) -> f64 {
        let as_leaf = self.leaf_error(id, &rows, targets);
        let Some(split) = self.nodes[id].split.clone() else {
            return as_leaf;
        };
        let (left, right): (Vec<usize>, Vec<usize>) = rows
            .iter()
            .partition(|&&r| goes_left(&cols[split.feature], r, split.test));
        let subtree = self.prune_node(split.left, left, cols, targets)
            + self.prune_node(split.right, right, cols, targets);
        if as_leaf <= subtree {
            self.nodes[id].split = None;
            as_leaf
        } else {
            subtree
        }
    }

    /// Drops nodes no longer reachable from the root.
    fn compact(&mut self) {
        let mut out: Vec<Node> = Vec::with_capacity(self.nodes.len());
        let mut stack = alloc::vec![(0usize, usize::MAX, false)];
        while let Some((old, parent, is_left)) = stack.pop() {
            let new_id = out.len();
            let node = &self.nodes[old];
            out.push(Node {
                value: node.value.clone(),
                split: node.split.clone(),
            });
            if parent != usize::MAX {
                let s = out[parent].split.as_mut().expect("parent has a split");
                if is_left {
                    s.left = new_id;
                } else {
                    s.right = new_id;
                }
            }
            if let Some(s) = &node.split {
                stack.push((s.right, new_id, false));
                stack.push((s.left, new_id, true));
            }
        }
        self.nodes = out;
    }
}

pub(crate) enum LeafOutput {
    Dist(Vec<f64>),
    Mean(f64),
}

impl Grower<'_> {
    fn build(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node {
            value: node_value(self.targets, &rows),
            split: None,
        });
        let depth_ok = self.params.max_depth.map_or(true, |d| depth < d);
        if !depth_ok || rows.len() < 2 * self.params.min_leaf || is_pure(self.targets, &rows) {
            return id;
        }
        let Some(best) = self.best_split(&rows) else {
            return id;
        };
        let (left, right): (Vec<usize>, Vec<usize>) = rows
            .iter()
            .partition(|&&r| goes_left(&self.cols[best.feature], r, best.test));
        let l = self.build(left, depth + 1);
        let r = self.build(right, depth + 1);
        self.nodes[id].split = Some(Split {
            feature: best.feature,
            test: best.test,
            left: l,
            right: r,
        });
        id
    }

    fn candidate_features(&mut self) -> Vec<usize> {
        let n = self.cols.len();
        let mut all: Vec<usize> = (0..n).collect();
        match (self.params.max_features, self.rng.as_deref_mut()) {
            (Some(m), Some(rng)) if m < n => {
                let (picked, _) = all.partial_shuffle(rng, m);
                let mut picked = picked.to_vec();
                picked.sort_unstable();
                picked
            }
            _ => {
                all.truncate(n);
                all
            }
        }
    }

    fn best_split(&mut self, rows: &[usize]) -> Option<Candidate> {
        let mut total = Side::empty(self.targets);
        for &r in rows {
            total.add(self.targets, r, 1);
        }
        let mut best: Option<Candidate> = None;
        for f in self.candidate_features() {
            let found = match &self.cols[f] {
                Column::Num(xs) => self.best_threshold(xs, rows, &total),
                Column::Cat { values, n } => self.best_category(values, *n, rows, &total),
            };
            if let Some((score, test)) = found {
                if best.as_ref().map_or(true, |b| score < b.score) {
                    best = Some(Candidate {
                        score,
                        feature: f,
                        test,
                    });
                }
            }
        }
        best
    }

    fn best_threshold(&self, xs: &[f64], rows: &[usize], total: &Side) -> Option<(f64, Test)> {
        let mut sorted = rows.to_vec();
        sorted.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
        let mut left = Side::empty(self.targets);
        let mut right = total.clone();
        let min_leaf = self.params.min_leaf;
        let mut best: Option<(f64, Test)> = None;
        for i in 0..sorted.len() - 1 {
            let r = sorted[i];
            left.add(self.targets, r, 1);
            right.add(self.targets, r, -1);
            let (lo, hi) = (xs[r], xs[sorted[i + 1]]);
            if lo == hi || left.n() < min_leaf || right.n() < min_leaf {
                continue;
            }
            let score = left.score() + right.score();
            if best.map_or(true, |(s, _)| score < s) {
                let mut t = lo + (hi - lo) / 2.0;
                if t >= hi {
                    t = lo;
                }
                best = Some((score, Test::LessEq(t)));
            }
        }
        best
    }

    fn best_category(&self, values: &[u32], n_cats: u32, rows: &[usize], total: &Side) -> Option<(f64, Test)> {
        let mut per_cat = alloc::vec![Side::empty(self.targets); n_cats as usize];
        for &r in rows {
            per_cat[values[r] as usize].add(self.targets, r, 1);
        }
        let min_leaf = self.params.min_leaf;
        let mut best: Option<(f64, Test)> = None;
        for (c, left) in per_cat.iter().enumerate() {
            let n_left = left.n();
            if n_left < min_leaf || rows.len() - n_left < min_leaf || n_left == rows.len() {
                continue;
            }
            let mut right = total.clone();
            for &r in rows.iter().filter(|&&r| values[r] == c as u32) {
                right.add(self.targets, r, -1);
            }
            let score = left.score() + right.score();
            if best.map_or(true, |(s, _)| score < s) {
                best = Some((score, Test::Equals(c as u32)));
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn xor_data() -> (Columns, Targets) {
        let a = vec![0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0, 1.0];
        let b = vec![0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0];
        let y = vec![0, 1, 1, 0, 0, 1, 1, 0];
        (
            vec![Column::Num(a), Column::Num(b)],
            Targets::Class { y, n_classes: 2 },
        )
    }

    #[test]
    fn unpruned_tree_learns_xor() {
        let (cols, t) = xor_data();
        let p = TreeParams {
            pruning: false,
            ..TreeParams::default()
        };
        let tree = fit_decision_tree(&cols, &t, &p, 0);
        let Targets::Class { y, .. } = &t else { unreachable!() };
        for r in 0..8 {
            match tree.predict_row(&cols, r) {
                LeafOutput::Dist(d) => assert_eq!(argmax(&d), y[r]),
                LeafOutput::Mean(_) => panic!(),
            }
        }
        assert_eq!(tree.node_count(), 7);
    }

    #[test]
    fn depth_limit() {
        let (cols, t) = xor_data();
        let p = TreeParams {
            max_depth: Some(1),
            pruning: false,
            ..TreeParams::default()
        };
        assert_eq!(fit_decision_tree(&cols, &t, &p, 0).node_count(), 3);
    }

    #[test]
    fn nominal_split() {
        let cols = vec![Column::Cat {
            values: vec![0, 1, 2, 2, 1, 0],
            n: 3,
        }];
        let t = Targets::Class {
            y: vec![0, 0, 1, 1, 0, 0],
            n_classes: 2,
        };
        let p = TreeParams {
            pruning: false,
            ..TreeParams::default()
        };
        let tree = fit_decision_tree(&cols, &t, &p, 0);
        assert_eq!(tree.node_count(), 3);
        assert_eq!(tree.nodes[0].split.as_ref().unwrap().test, Test::Equals(2));
    }

    #[test]
    fn tie_prefers_lowest_feature_then_threshold() {
        // Both columns separate the classes identically.
        let x = vec![1.0, 2.0, 3.0, 4.0];
        let cols = vec![Column::Num(x.clone()), Column::Num(x)];
        let t = Targets::Class {
            y: vec![0, 0, 1, 1],
            n_classes: 2,
        };
        let p = TreeParams {
            pruning: false,
            ..TreeParams::default()
        };
        let tree = fit_decision_tree(&cols, &t, &p, 0);
        let s = tree.nodes[0].split.as_ref().unwrap();
        assert_eq!((s.feature, s.test), (0, Test::LessEq(2.5)));
    }

    #[test]
    fn regression_tree_fits_step() {
        let cols = vec![Column::Num(vec![1.0, 2.0, 3.0, 4.0])];
        let t = Targets::Reg(vec![5.0, 5.0, 9.0, 9.0]);
        let p = TreeParams {
            pruning: false,
            ..TreeParams::default()
        };
        let tree = fit_decision_tree(&cols, &t, &p, 0);
        let RawOutput::Reg(ys) = tree.predict(&cols, 4) else { panic!() };
        assert_eq!(ys, vec![5.0, 5.0, 9.0, 9.0]);
    }

    #[test]
    fn pruning_never_grows_the_tree() {
        let n = 60;
        let x: Vec<f64> = (0..n).map(|i| ((i * 37) % 17) as f64).collect();
        let z: Vec<f64> = (0..n).map(|i| ((i * 11) % 7) as f64).collect();
        let y: Vec<u32> = (0..n).map(|i| ((i * 13) % 3 == 0) as u32).collect();
        let cols = vec![Column::Num(x), Column::Num(z)];
        let t = Targets::Class { y, n_classes: 2 };
        for seed in 0..5 {
            let (before, after) = node_counts(&cols, &t, &TreeParams::default(), seed);
            assert!(after <= before);
            assert!(after >= 1);
        }
    }
}
