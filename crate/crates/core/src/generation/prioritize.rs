use alloc::string::String;
use alloc::vec::Vec;

use super::label_classes;
use crate::matching::{cosine, EmbeddingTable};
use crate::tabular::{Dataset, Value};
use crate::{Error, Result};

fn present(v: &Value) -> bool {
    match *v {
        Value::Num(x) => x != 0.0,
        Value::Cat(c) => c > 0,
        Value::Missing => false,
    }
}

/// Ranks auxiliary-only `candidates` by how close their name embedding is to
/// either class of a binary-labeled `train`.
///
/// Each class centroid is the mean of the name embeddings of `train_features`,
/// each weighted by the number of rows of that class in which the feature is
/// present (non-zero number or non-first category). A candidate scores the
/// larger of its two cosines. Candidates without an embedding rank last.
/// Equal scores keep the input order.
pub fn prioritize_targets(
    candidates: &[String],
    train: &Dataset,
    train_features: &[String],
    table: &EmbeddingTable,
) -> Result<Vec<String>> {
    let (rows, classes) = label_classes(train)?;
    let binary = train
        .label()
        .and_then(|l| l.feature.kind.categories())
        .is_some_and(|c| c.len() == 2);
    if !binary {
        return Err(Error::InvalidConfig("target prioritization needs a binary label".into()));
    }
    let dim = table.dim();
    let mut centroids = [alloc::vec![0.0; dim], alloc::vec![0.0; dim]];
    let mut weights = [0.0f64; 2];
    for name in train_features {
        let col = train
            .column_by_name(name)
            .ok_or_else(|| Error::UnknownFeature(name.clone()))?;
        let Some(v) = table.embed(name) else { continue };
        let mut counts = [0.0f64; 2];
        for (&r, &c) in rows.iter().zip(&classes) {
            if present(&col[r]) {
                counts[c as usize] += 1.0;
            }
        }
        for k in 0..2 {
            centroids[k].iter_mut().zip(&v).for_each(|(s, x)| *s += counts[k] * x);
            weights[k] += counts[k];
        }
    }
    let score = |name: &String| -> Option<f64> {
        let v = table.embed(name)?;
        let cos: Vec<f64> = (0..2)
            .filter(|&k| weights[k] > 0.0)
            .map(|k| {
                let c: Vec<f64> = centroids[k].iter().map(|s| s / weights[k]).collect();
                cosine(&v, &c)
            })
            .collect();
        Some(cos.into_iter().fold(f64::NEG_INFINITY, f64::max)).filter(|s| s.is_finite())
    };
    let mut scored: Vec<(Option<f64>, &String)> = candidates.iter().map(|c| (score(c), c)).collect();
    scored.sort_by(|a, b| match (a.0, b.0) {
        (Some(x), Some(y)) => y.total_cmp(&x),
        (Some(_), None) => core::cmp::Ordering::Less,
        (None, Some(_)) => core::cmp::Ordering::Greater,
        (None, None) => core::cmp::Ordering::Equal,
    });
    Ok(scored.into_iter().map(|(_, n)| n.clone()).collect())
}
