use alloc::vec::Vec;

use rand::seq::SliceRandom;

use super::{accuracy, fit, predict, LearnerSpec, Target};
use crate::rng;
use crate::tabular::{Dataset, Value};
use crate::{Error, Result};

/// Fold index for every row. Rows of each class are shuffled with `seed`,
/// classes are laid end to end in class order and fold ids are dealt
/// round-robin, so every fold gets ⌊n_c/k⌋ or ⌈n_c/k⌉ rows of class c.
pub fn stratified_folds(classes: &[u32], k: usize, seed: u64) -> Vec<usize> {
    let n_classes = classes.iter().map(|&c| c as usize + 1).max().unwrap_or(0);
    let mut groups: Vec<Vec<usize>> = alloc::vec![Vec::new(); n_classes];
    for (r, &c) in classes.iter().enumerate() {
        groups[c as usize].push(r);
    }
    let mut r = rng::seeded(seed);
    let mut folds = alloc::vec![0; classes.len()];
    let mut pos = 0;
    for g in &mut groups {
        g.shuffle(&mut r);
        for &row in g.iter() {
            folds[row] = pos % k;
            pos += 1;
        }
    }
    folds
}

/// Target values as classes, with the rows that carry one.
fn class_target(data: &Dataset, target: Target<'_>) -> Result<(Vec<usize>, Vec<u32>)> {
    let (feature, values) = match target {
        Target::Label => {
            let l = data.label().ok_or(Error::Unlabeled)?;
            (&l.feature, l.values.as_slice())
        }
        Target::Feature(name) => {
            let i = data
                .feature_index(name)
                .ok_or_else(|| Error::UnknownFeature(name.into()))?;
            (&data.features()[i], data.column(i))
        }
    };
    if !feature.kind.is_nominal() {
        return Err(Error::NotClassification(feature.name.clone()));
    }
    Ok(values
        .iter()
        .enumerate()
        .filter_map(|(r, v)| v.as_cat().map(|c| (r, c)))
        .unzip())
}

/// Mean accuracy over `folds` stratified folds. Rows with a missing target
/// are left out.
pub fn cross_val_accuracy(
    spec: &LearnerSpec,
    data: &Dataset,
    target: Target<'_>,
    folds: usize,
    seed: u64,
) -> Result<f64> {
    if folds < 2 {
        return Err(Error::InvalidConfig("cross-validation needs at least 2 folds".into()));
    }
    let (rows, classes) = class_target(data, target)?;
    if rows.len() < folds {
        return Err(Error::TooFewRows {
            needed: folds,
            have: rows.len(),
        });
    }
    let local = stratified_folds(&classes, folds, seed);
    let mut assignment = alloc::vec![usize::MAX; data.n_rows()];
    for (&r, &f) in rows.iter().zip(&local) {
        assignment[r] = f;
    }
    cross_val_accuracy_with_folds(spec, data, target, &assignment)
}

/// Mean accuracy over the folds given by `assignment` (one fold id per row;
/// `usize::MAX` leaves a row out). Folds without test rows are skipped. A
/// training fold with a single class predicts that class.
pub fn cross_val_accuracy_with_folds(
    spec: &LearnerSpec,
    data: &Dataset,
    target: Target<'_>,
    assignment: &[usize],
) -> Result<f64> {
    if assignment.len() != data.n_rows() {
        return Err(Error::LengthMismatch {
            name: "fold assignment".into(),
            expected: data.n_rows(),
            got: assignment.len(),
        });
    }
    let k = assignment.iter().copied().filter(|&f| f != usize::MAX).max().map_or(0, |m| m + 1);
    let mut total = 0.0;
    let mut used = 0usize;
    for fold in 0..k {
        let test: Vec<usize> = (0..data.n_rows()).filter(|&r| assignment[r] == fold).collect();
        if test.is_empty() {
            continue;
        }
        let train: Vec<usize> = (0..data.n_rows())
            .filter(|&r| assignment[r] != fold && assignment[r] != usize::MAX)
            .collect();
        let train = data.select_rows(&train);
        let test = data.select_rows(&test);
        let truth = target_values(&test, target);
        let predicted = match fit(spec, &train, target) {
            Ok(p) => predict(&p, &test)?.values,
            Err(Error::SingleClass(_)) => {
                let only = target_values(&train, target)
                    .into_iter()
                    .find(|v| !v.is_missing())
                    .unwrap_or(Value::Missing);
                alloc::vec![only; test.n_rows()]
            }
            Err(e) => return Err(e),
        };
        total += accuracy(&predicted, &truth);
        used += 1;
    }
    Ok(if used == 0 { 0.0 } else { total / used as f64 })
}

fn target_values(data: &Dataset, target: Target<'_>) -> Vec<Value> {
    match target {
        Target::Label => data.label().map(|l| l.values.clone()).unwrap_or_default(),
        Target::Feature(name) => data.column_by_name(name).map(<[Value]>::to_vec).unwrap_or_default(),
    }
}
