use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::tabular::{Feature, FeatureKind, Value};

/// Imputation value for one input column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub(crate) enum Fill {
    Num(f64),
    Cat(u32),
}

/// A dense, imputed input column.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Column {
    Num(Vec<f64>),
    Cat { values: Vec<u32>, n: u32 },
}

pub(crate) type Columns = Vec<Column>;

/// Mean for continuous columns, mode (lowest index on ties) for nominal ones.
/// A column with no observed value fills with 0.
pub(crate) fn fit_fills(features: &[Feature], columns: &[Vec<Value>]) -> Vec<Fill> {
    features
        .iter()
        .zip(columns)
        .map(|(f, col)| match &f.kind {
            FeatureKind::Continuous => {
                let (sum, n) = col
                    .iter()
                    .filter_map(Value::as_num)
                    .fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
                Fill::Num(if n == 0 { 0.0 } else { sum / n as f64 })
            }
            FeatureKind::Nominal { categories } => {
                let mut counts = alloc::vec![0usize; categories.len()];
                for c in col.iter().filter_map(Value::as_cat) {
                    counts[c as usize] += 1;
                }
                let mut best = 0;
                for (i, &c) in counts.iter().enumerate() {
                    if c > counts[best] {
                        best = i;
                    }
                }
                Fill::Cat(best as u32)
            }
        })
        .collect()
}

pub(crate) fn encode(features: &[Feature], columns: &[Vec<Value>], fills: &[Fill]) -> Columns {
    features
        .iter()
        .zip(columns)
        .zip(fills)
        .map(|((f, col), fill)| match (&f.kind, fill) {
            (FeatureKind::Continuous, Fill::Num(m)) => {
                Column::Num(col.iter().map(|v| v.as_num().unwrap_or(*m)).collect())
            }
            (FeatureKind::Nominal { categories }, Fill::Cat(m)) => Column::Cat {
                values: col.iter().map(|v| v.as_cat().unwrap_or(*m)).collect(),
                n: categories.len() as u32,
            },
            _ => unreachable!("fill kind follows feature kind"),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn mean_and_mode_imputation() {
        let features = vec![Feature::continuous("a"), Feature::nominal("b", ["x", "y", "z"])];
        let columns = vec![
            vec![Value::Num(1.0), Value::Missing, Value::Num(3.0)],
            vec![Value::Cat(2), Value::Cat(2), Value::Missing],
        ];
        let fills = fit_fills(&features, &columns);
        assert_eq!(fills, vec![Fill::Num(2.0), Fill::Cat(2)]);
        let enc = encode(&features, &columns, &fills);
        assert_eq!(enc[0], Column::Num(vec![1.0, 2.0, 3.0]));
        assert_eq!(
            enc[1],
            Column::Cat {
                values: vec![2, 2, 2],
                n: 3
            }
        );
    }

    #[test]
    fn all_missing_column() {
        let features = vec![Feature::continuous("a")];
        let columns = vec![vec![Value::Missing, Value::Missing]];
        assert_eq!(fit_fills(&features, &columns), vec![Fill::Num(0.0)]);
    }
}
