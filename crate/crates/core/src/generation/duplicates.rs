use alloc::string::String;
use alloc::vec::Vec;

use super::{gain_on, name_taken, unique_name, DuplicatePolicy, GeneratedFeature, GenerationConfig};
use crate::tabular::Dataset;
use crate::{Error, Result};

/// Merges features that approximate the same auxiliary target (same
/// `source_target`) learned from different auxiliary datasets. Each group
/// takes the position of its first member; singletons pass through.
///
/// `ArgmaxUtility` keeps the member whose addition to `train` gives the
/// largest wrapper accuracy gain (ties: higher information gain, then
/// smaller name). A member that cannot be applied to `train` alone, because
/// its inputs include generated features, is scored by its recorded utility.
/// `Committee` replaces the group by one feature holding every approximation.
pub fn resolve_duplicates(
    features: Vec<GeneratedFeature>,
    train: &Dataset,
    cfg: &GenerationConfig,
) -> Result<Vec<GeneratedFeature>> {
    let mut groups: Vec<(String, Vec<GeneratedFeature>)> = Vec::new();
    for f in features {
        match groups.iter_mut().find(|g| g.0 == f.source_target) {
            Some(g) => g.1.push(f),
            None => groups.push((f.source_target.clone(), alloc::vec![f])),
        }
    }
    for (target, members) in &groups {
        if members.iter().any(|m| m.kind != members[0].kind) {
            return Err(Error::MixedDuplicateKinds(target.clone()));
        }
    }
    if groups.iter().all(|g| g.1.len() == 1) {
        return Ok(groups.into_iter().flat_map(|g| g.1).collect());
    }
    let baseline = cfg.wrapper_cv(train)?;
    let mut out: Vec<GeneratedFeature> = Vec::with_capacity(groups.len());
    let mut reserved = alloc::collections::BTreeSet::new();
    for (_, members) in &groups {
        reserved.extend(members.iter().map(|m| m.name.clone()));
    }
    for (target, mut members) in groups {
        if members.len() == 1 {
            out.push(members.pop().expect("one member"));
            continue;
        }
        match cfg.duplicate_policy {
            DuplicatePolicy::ArgmaxUtility => {
                let mut best: Option<(f64, GeneratedFeature)> = None;
                for m in members {
                    let u = match m.values(train) {
                        Ok(v) => cfg.wrapper_cv(&train.append_feature(m.feature(), v)?)? - baseline,
                        Err(Error::UnknownFeature(_)) => m.utility_at_acceptance,
                        Err(e) => return Err(e),
                    };
                    let better = match &best {
                        None => true,
                        Some((bu, b)) => {
                            u > *bu
                                || (u == *bu
                                    && (m.information_gain > b.information_gain
                                        || (m.information_gain == b.information_gain && m.name < b.name)))
                        }
                    };
                    if better {
                        best = Some((u, m));
                    }
                }
                out.push(best.expect("non-empty group").1);
            }
            DuplicatePolicy::Committee => {
                let n = members.len() as f64;
                let utility = members.iter().map(|m| m.utility_at_acceptance).sum::<f64>() / n;
                let mean_gain = members.iter().map(|m| m.information_gain).sum::<f64>() / n;
                let kind = members[0].kind.clone();
                let approximations: Vec<_> = members.into_iter().flat_map(|m| m.approximations).collect();
                let sources: Vec<&str> = approximations.iter().map(|a| a.source_dataset.as_str()).collect();
                let base = alloc::format!("gen_{}_{}", sources.join("+"), target);
                let name = unique_name(&base, |n| name_taken(train, &reserved, n));
                reserved.insert(name.clone());
                let mut f = GeneratedFeature {
                    name,
                    kind,
                    source_target: target,
                    approximations,
                    utility_at_acceptance: utility,
                    information_gain: mean_gain,
                };
                if let Ok(v) = f.values(train) {
                    f.information_gain = gain_on(train, &v)?;
                }
                out.push(f);
            }
        }
    }
    Ok(out)
}
