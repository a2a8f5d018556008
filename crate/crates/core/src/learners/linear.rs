//! Multinomial logistic regression fit by full-batch gradient descent.
//! Continuous inputs are standardized with training statistics; nominal
//! inputs are one-hot encoded.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::encode::{Column, Columns};
use super::{LinearParams, RawOutput};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum InputMap {
    /// (mean, standard deviation); a zero deviation maps the input to 0.
    Num(f64, f64),
    OneHot(u32),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub(crate) struct Linear {
    inputs: Vec<InputMap>,
    /// One row per class; the last entry of each row is the bias.
    weights: Vec<Vec<f64>>,
}

fn design_row(inputs: &[InputMap], cols: &Columns, r: usize, out: &mut Vec<f64>) {
    out.clear();
    for (map, col) in inputs.iter().zip(cols) {
        match (map, col) {
            (InputMap::Num(mean, sd), Column::Num(xs)) => {
                out.push(if *sd > 0.0 { (xs[r] - mean) / sd } else { 0.0 });
            }
            (InputMap::OneHot(n), Column::Cat { values, .. }) => {
                for c in 0..*n {
                    out.push(if values[r] == c { 1.0 } else { 0.0 });
                }
            }
            _ => unreachable!("input map follows column kind"),
        }
    }
    out.push(1.0);
}

fn softmax(z: &mut [f64]) {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in z.iter_mut() {
        *v = libm::exp(*v - max);
        sum += *v;
    }
    z.iter_mut().for_each(|v| *v /= sum);
}

impl Linear {
    pub(crate) fn fit(cols: &Columns, y: &[u32], n_classes: usize, p: &LinearParams) -> Linear {
        let n = y.len();
        let inputs: Vec<InputMap> = cols
            .iter()
            .map(|c| match c {
                Column::Num(xs) => {
                    let mean = xs.iter().sum::<f64>() / n as f64;
                    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
                    InputMap::Num(mean, libm::sqrt(var))
                }
                Column::Cat { n, .. } => InputMap::OneHot(*n),
            })
            .collect();
        let mut buf = Vec::new();
        let x: Vec<Vec<f64>> = (0..n)
            .map(|r| {
                design_row(&inputs, cols, r, &mut buf);
                buf.clone()
            })
            .collect();
        let d = x.first().map_or(1, Vec::len);
        let mut w = alloc::vec![alloc::vec![0.0; d]; n_classes];
        let mut grad = w.clone();
        let mut z = alloc::vec![0.0; n_classes];
        for _ in 0..p.epochs {
            grad.iter_mut().for_each(|g| g.iter_mut().for_each(|v| *v = 0.0));
            for (xi, &yi) in x.iter().zip(y) {
                for (zk, wk) in z.iter_mut().zip(&w) {
                    *zk = wk.iter().zip(xi).map(|(a, b)| a * b).sum();
                }
                softmax(&mut z);
                for (k, gk) in grad.iter_mut().enumerate() {
                    let err = z[k] - if k == yi as usize { 1.0 } else { 0.0 };
                    gk.iter_mut().zip(xi).for_each(|(g, v)| *g += err * v);
                }
            }
            for (wk, gk) in w.iter_mut().zip(&grad) {
                for (j, (wv, gv)) in wk.iter_mut().zip(gk).enumerate() {
                    let reg = if j + 1 < d { p.l2 * *wv } else { 0.0 };
                    *wv -= p.learning_rate * (gv / n as f64 + reg);
                }
            }
        }
        Linear { inputs, weights: w }
    }

    pub(crate) fn predict(&self, cols: &Columns, n_rows: usize) -> RawOutput {
        let mut buf = Vec::new();
        RawOutput::Class(
            (0..n_rows)
                .map(|r| {
                    design_row(&self.inputs, cols, r, &mut buf);
                    let mut z: Vec<f64> = self
                        .weights
                        .iter()
                        .map(|wk| wk.iter().zip(&buf).map(|(a, b)| a * b).sum())
                        .collect();
                    softmax(&mut z);
                    z
                })
                .collect(),
        )
    }
}
