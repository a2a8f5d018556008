//! Random forest of unpruned trees with per-split feature subsampling.

use alloc::vec::Vec;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::encode::Columns;
use super::tree::{GrowParams, LeafOutput, Tree};
use super::{argmax, ForestParams, RawOutput, Targets};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub(crate) struct Forest {
    trees: Vec<Tree>,
    /// `None` for regression forests.
    n_classes: Option<usize>,
}

/// Features tried per split: `fraction · n`, rounded, at least one. The
/// default fraction √n/n gives round(√n).
pub(crate) fn features_per_split(fraction: Option<f64>, n: usize) -> usize {
    let f = fraction.unwrap_or_else(|| libm::sqrt(n as f64) / n as f64);
    rng::round_half_up(f * n as f64).clamp(1, n.max(1))
}

impl Forest {
    pub(crate) fn fit(cols: &Columns, targets: &Targets, p: &ForestParams, seed: u64) -> Forest {
        let n = targets.len();
        let params = GrowParams {
            max_depth: p.max_depth,
            min_leaf: p.min_samples_leaf,
            max_features: Some(features_per_split(p.feature_fraction, cols.len())),
        };
        let trees = (0..p.trees)
            .map(|t| {
                let mut r = rng::seeded(rng::derive(seed, t as u64));
                let rows: Vec<usize> = if p.bootstrap {
                    (0..n).map(|_| r.random_range(0..n)).collect()
                } else {
                    (0..n).collect()
                };
                Tree::grow(cols, targets, rows, &params, Some(&mut r))
            })
            .collect();
        let n_classes = match targets {
            Targets::Class { n_classes, .. } => Some(*n_classes),
            Targets::Reg(_) => None,
        };
        Forest { trees, n_classes }
    }

    pub(crate) fn node_count(&self) -> usize {
        self.trees.iter().map(Tree::node_count).sum()
    }

    /// Majority vote (ties to the lowest class) with the fraction of trees
    /// voting for class 1 as the positive score; mean for regression.
    pub(crate) fn predict(&self, cols: &Columns, n_rows: usize) -> RawOutput {
        let n_trees = self.trees.len() as f64;
        match self.n_classes {
            Some(k) => {
                let mut classes = Vec::with_capacity(n_rows);
                let mut positive = Vec::with_capacity(n_rows);
                for r in 0..n_rows {
                    let mut votes = alloc::vec![0.0; k];
                    for t in &self.trees {
                        if let LeafOutput::Dist(d) = t.predict_row(cols, r) {
                            votes[argmax(&d) as usize] += 1.0;
                        }
                    }
                    classes.push(argmax(&votes));
                    positive.push(if k > 1 { votes[1] / n_trees } else { 0.0 });
                }
                RawOutput::Voted { classes, positive }
            }
            None => RawOutput::Reg(
                (0..n_rows)
                    .map(|r| {
                        let sum: f64 = self
                            .trees
                            .iter()
                            .map(|t| match t.predict_row(cols, r) {
                                LeafOutput::Mean(m) => m,
                                LeafOutput::Dist(_) => unreachable!(),
                            })
                            .sum();
                        sum / n_trees
                    })
                    .collect(),
            ),
        }
    }
}
