//! k-nearest neighbours over min-max scaled continuous inputs plus a
//! mismatch count on nominal inputs.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::encode::{Column, Columns};
use super::{KnnParams, RawOutput, Targets};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub(crate) struct Knn {
    k: usize,
    /// Per continuous input: (min, span) from the training rows.
    scales: Vec<(f64, f64)>,
    /// Training rows, scaled continuous part.
    num: Vec<Vec<f64>>,
    cat: Vec<Vec<u32>>,
    targets: KnnTargets,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum KnnTargets {
    Class { y: Vec<u32>, n_classes: usize },
    Reg(Vec<f64>),
}

fn split_row(cols: &Columns, scales: &[(f64, f64)], r: usize) -> (Vec<f64>, Vec<u32>) {
    let mut num = Vec::new();
    let mut cat = Vec::new();
    for col in cols {
        match col {
            Column::Num(xs) => {
                let (lo, span) = scales[num.len()];
                num.push(if span > 0.0 { (xs[r] - lo) / span } else { 0.0 });
            }
            Column::Cat { values, .. } => cat.push(values[r]),
        }
    }
    (num, cat)
}

impl Knn {
    pub(crate) fn fit(cols: &Columns, targets: &Targets, p: &KnnParams) -> Knn {
        let n = targets.len();
        let scales: Vec<(f64, f64)> = cols
            .iter()
            .filter_map(|c| match c {
                Column::Num(xs) => {
                    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
                    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    Some((lo, hi - lo))
                }
                Column::Cat { .. } => None,
            })
            .collect();
        let (num, cat) = (0..n).map(|r| split_row(cols, &scales, r)).unzip();
        let targets = match targets {
            Targets::Class { y, n_classes } => KnnTargets::Class {
                y: y.clone(),
                n_classes: *n_classes,
            },
            Targets::Reg(y) => KnnTargets::Reg(y.clone()),
        };
        Knn {
            k: p.k,
            scales,
            num,
            cat,
            targets,
        }
    }

    /// Indices of the k nearest training rows, ordered by (distance, index).
    fn neighbours(&self, num: &[f64], cat: &[u32]) -> Vec<usize> {
        let mut d: Vec<(f64, usize)> = self
            .num
            .iter()
            .zip(&self.cat)
            .enumerate()
            .map(|(i, (tn, tc))| {
                let sq: f64 = tn.iter().zip(num).map(|(a, b)| (a - b) * (a - b)).sum();
                let mismatches = tc.iter().zip(cat).filter(|(a, b)| a != b).count();
                (libm::sqrt(sq + mismatches as f64), i)
            })
            .collect();
        let k = self.k.min(d.len());
        let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if k < d.len() {
            d.select_nth_unstable_by(k, cmp);
            d.truncate(k);
        }
        d.sort_unstable_by(cmp);
        d.into_iter().map(|(_, i)| i).collect()
    }

    pub(crate) fn predict(&self, cols: &Columns, n_rows: usize) -> RawOutput {
        let rows = (0..n_rows).map(|r| {
            let (num, cat) = split_row(cols, &self.scales, r);
            self.neighbours(&num, &cat)
        });
        match &self.targets {
            KnnTargets::Class { y, n_classes } => RawOutput::Class(
                rows.map(|nb| {
                    let mut dist = alloc::vec![0.0; *n_classes];
                    for &i in &nb {
                        dist[y[i] as usize] += 1.0;
                    }
                    let k = nb.len() as f64;
                    dist.iter_mut().for_each(|v| *v /= k);
                    dist
                })
                .collect(),
            ),
            KnnTargets::Reg(y) => RawOutput::Reg(
                rows.map(|nb| nb.iter().map(|&i| y[i]).sum::<f64>() / nb.len() as f64)
                    .collect(),
            ),
        }
    }
}
