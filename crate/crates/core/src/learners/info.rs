use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::tabular::Value;

/// Shannon entropy in bits of a class distribution given as counts.
fn entropy_of_counts(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    -counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            p * libm::log2(p)
        })
        .sum::<f64>()
}

fn class_counts(labels: impl Iterator<Item = u32>, n_classes: usize) -> Vec<usize> {
    let mut counts = alloc::vec![0; n_classes];
    for c in labels {
        counts[c as usize] += 1;
    }
    counts
}

/// Shannon entropy of `labels` in bits.
pub fn entropy(labels: &[u32]) -> f64 {
    let k = labels.iter().map(|&c| c as usize + 1).max().unwrap_or(0);
    entropy_of_counts(&class_counts(labels.iter().copied(), k))
}

/// Weighted entropy of a partition, each part given as class counts.
fn conditional(parts: &[&[usize]], n: usize) -> f64 {
    parts
        .iter()
        .map(|c| c.iter().sum::<usize>() as f64 / n as f64 * entropy_of_counts(c))
        .sum()
}

/// Information gain of a feature column about `labels`, in bits.
///
/// Nominal columns (any `Cat` value) split on every category. Continuous
/// columns take the best binary split at a midpoint between consecutive
/// distinct values. In both cases missing cells form a branch of their own.
pub fn information_gain(values: &[Value], labels: &[u32]) -> f64 {
    assert_eq!(values.len(), labels.len(), "one label per value");
    let n = labels.len();
    if n == 0 {
        return 0.0;
    }
    let k = labels.iter().map(|&c| c as usize + 1).max().unwrap_or(0);
    let h = entropy_of_counts(&class_counts(labels.iter().copied(), k));
    let missing = class_counts(
        values
            .iter()
            .zip(labels)
            .filter(|(v, _)| v.is_missing())
            .map(|(_, &c)| c),
        k,
    );
    let cond = if values.iter().any(|v| matches!(v, Value::Cat(_))) {
        let mut branches: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        for (v, &c) in values.iter().zip(labels) {
            if let Value::Cat(cat) = v {
                branches.entry(*cat).or_insert_with(|| alloc::vec![0; k])[c as usize] += 1;
            }
        }
        // Summing in a label-independent order keeps the result bit-identical
        // under renaming of categories.
        let mut parts: Vec<&[usize]> = branches.values().map(Vec::as_slice).collect();
        parts.sort_unstable();
        parts.push(&missing);
        conditional(&parts, n)
    } else {
        best_threshold_conditional(values, labels, k, &missing)
    };
    (h - cond).clamp(0.0, h)
}

fn best_threshold_conditional(values: &[Value], labels: &[u32], k: usize, missing: &[usize]) -> f64 {
    let n = labels.len();
    let mut present: Vec<(f64, u32)> = values
        .iter()
        .zip(labels)
        .filter_map(|(v, &c)| v.as_num().map(|x| (x, c)))
        .collect();
    present.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut left = alloc::vec![0; k];
    let mut right = class_counts(present.iter().map(|p| p.1), k);
    let mut best = conditional(&[&right, missing], n);
    for i in 0..present.len().saturating_sub(1) {
        let c = present[i].1 as usize;
        left[c] += 1;
        right[c] -= 1;
        if present[i].0 == present[i + 1].0 {
            continue;
        }
        let cond = conditional(&[&left, &right, missing], n);
        if cond < best {
            best = cond;
        }
    }
    best
}
