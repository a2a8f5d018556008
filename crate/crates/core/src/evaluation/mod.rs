//! Experiment harness: building feature generation tasks from one dataset,
//! the fold-based testing protocol, and significance testing.
//!
//! The protocol simulates example scarcity. Each outer training part is cut
//! down to a stratified α-fraction, features are generated against the
//! auxiliaries using only that reduced part, and the primary learner is
//! trained with and without the accepted features. Both variants are scored
//! on the same held-out fold.

mod stats;

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::exec::{Executor, Sequential};
use crate::generation::{enhance, resolve_duplicates, Auxiliary, Engine, GeneratedFeature, GenerationConfig};
use crate::learners::{self, accuracy, stratified_folds, LearnerSpec, Target};
use crate::matching::{match_features, MatchStrategy};
use crate::rng::{self, round_half_up};
use crate::tabular::Dataset;
use crate::{Error, Result};

pub use stats::{extended_f64, paired_t_test, regularized_incomplete_beta, two_sided_p, TTest};

const SPLIT_ROW_SALT: u64 = 0x524f_5753;
const SPLIT_FEATURE_SALT: u64 = 0x4645_4154;
const FOLD_SALT: u64 = 0x464f_4c44;
const ALPHA_SALT: u64 = 0x414c_5048;

/// Significance level for the per-learner verdict.
pub const SIGNIFICANCE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FgtSplitSpec {
    /// Share of the features that both sides keep.
    pub mu1: f64,
    /// Share of the remaining features that go to the training side.
    pub mu2: f64,
    pub seed: u64,
}

impl Default for FgtSplitSpec {
    fn default() -> Self {
        FgtSplitSpec {
            mu1: 1.0 / 3.0,
            mu2: 2.0 / 3.0,
            seed: 0,
        }
    }
}

impl FgtSplitSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, x) in [("mu1", self.mu1), ("mu2", self.mu2)] {
            if !(x > 0.0 && x < 1.0) {
                return Err(Error::InvalidConfig(alloc::format!("{name} must be in (0, 1)")));
            }
        }
        Ok(())
    }
}

/// A training set and an auxiliary set carved out of one labeled dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct FgtSplit {
    pub train: Dataset,
    pub aux: Dataset,
    /// Features present on both sides, in schema order.
    pub shared: Vec<String>,
    /// Row indices of the source dataset, ascending.
    pub train_rows: Vec<usize>,
    pub aux_rows: Vec<usize>,
}

/// Splits `d` into a training set and an auxiliary set.
///
/// Rows are shuffled and halved (the auxiliary side gets the extra row when
/// the count is odd). round(μ1·|F|) features are shared; of the rest,
/// round(μ2·r) go to the training side and the others to the auxiliary
/// side. Every part must be non-empty. Both sides keep the label and the
/// original feature order.
pub fn split_fgt(d: &Dataset, spec: &FgtSplitSpec) -> Result<FgtSplit> {
    spec.validate()?;
    if !d.is_labeled() {
        return Err(Error::Unlabeled);
    }
    let n = d.n_rows();
    if n < 4 {
        return Err(Error::TooFewRows { needed: 4, have: n });
    }
    let nf = d.n_features();
    if nf < 3 {
        return Err(Error::InvalidConfig(alloc::format!(
            "splitting needs at least 3 features, the dataset has {nf}"
        )));
    }
    let n_shared = round_half_up(spec.mu1 * nf as f64).max(1);
    let rest = nf.saturating_sub(n_shared);
    let n_train_only = round_half_up(spec.mu2 * rest as f64).max(1);
    if n_shared >= nf || n_train_only >= rest {
        return Err(Error::InvalidConfig(alloc::format!(
            "{nf} features cannot be split into non-empty shared, train-only and aux-only parts \
             with mu1 = {} and mu2 = {}",
            spec.mu1,
            spec.mu2
        )));
    }

    let mut rows: Vec<usize> = (0..n).collect();
    rows.shuffle(&mut rng::seeded(rng::derive(spec.seed, SPLIT_ROW_SALT)));
    let mut train_rows = rows[..n / 2].to_vec();
    let mut aux_rows = rows[n / 2..].to_vec();
    train_rows.sort_unstable();
    aux_rows.sort_unstable();

    let mut order: Vec<usize> = (0..nf).collect();
    order.shuffle(&mut rng::seeded(rng::derive(spec.seed, SPLIT_FEATURE_SALT)));
    let shared: BTreeSet<usize> = order[..n_shared].iter().copied().collect();
    let train_only: BTreeSet<usize> = order[n_shared..n_shared + n_train_only].iter().copied().collect();
    let names = |keep: &dyn Fn(usize) -> bool| -> Vec<String> {
        (0..nf).filter(|&i| keep(i)).map(|i| d.features()[i].name.clone()).collect()
    };
    let train_names = names(&|i| shared.contains(&i) || train_only.contains(&i));
    let aux_names = names(&|i| !train_only.contains(&i));
    Ok(FgtSplit {
        train: d.select_rows(&train_rows).project(&train_names)?,
        aux: d.select_rows(&aux_rows).project(&aux_names)?,
        shared: names(&|i| shared.contains(&i)),
        train_rows,
        aux_rows,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolConfig {
    pub folds: usize,
    /// Fraction of each outer training part kept for learning.
    pub alpha: f64,
    /// Learners evaluated on the baseline and enhanced views. Generation is
    /// run once per learner, with that learner as the wrapper's judge.
    pub primary_specs: Vec<LearnerSpec>,
    /// `primary_spec` and `seed` are overwritten per fold and learner.
    pub generation: GenerationConfig,
    /// Upper bound on the candidates that reach the final wrapper pass.
    pub top_k_cap: Option<usize>,
    /// Accepted-feature count between points of the accuracy curve.
    pub curve_step: usize,
    pub seed: u64,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        ProtocolConfig {
            folds: 10,
            alpha: 0.25,
            primary_specs: alloc::vec![LearnerSpec::decision_tree()],
            generation: GenerationConfig::default(),
            top_k_cap: Some(50),
            curve_step: 5,
            seed: 0,
        }
    }
}

impl ProtocolConfig {
    pub fn validate(&self) -> Result<()> {
        if self.folds < 2 {
            return Err(Error::InvalidConfig("folds must be at least 2".into()));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::InvalidConfig("alpha must be in (0, 1]".into()));
        }
        if self.primary_specs.is_empty() {
            return Err(Error::InvalidConfig("at least one primary learner is required".into()));
        }
        for s in &self.primary_specs {
            s.validate()?;
        }
        if self.top_k_cap == Some(0) {
            return Err(Error::InvalidConfig("top_k_cap must be at least 1".into()));
        }
        if self.curve_step == 0 {
            return Err(Error::InvalidConfig("curve_step must be at least 1".into()));
        }
        self.generation.validate()
    }

    fn fold_seed(&self, fold: usize) -> u64 {
        self.seed.wrapping_add(fold as u64)
    }
}

/// An auxiliary dataset and how to match it against the training set.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolAux {
    pub name: String,
    pub data: Dataset,
    pub strategy: MatchStrategy,
}

/// Row indices (into the training set) used by one outer fold.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub test_rows: Vec<usize>,
    /// The α-reduced training part, ascending.
    pub reduced_rows: Vec<usize>,
}

/// Outer folds and their α-reductions. Both are stratified by class; every
/// class keeps at least one row in each reduced part.
pub fn plan_folds(train: &Dataset, cfg: &ProtocolConfig) -> Result<Vec<FoldPlan>> {
    cfg.validate()?;
    let classes = train.class_labels()?;
    let label = train.label().expect("class_labels succeeded");
    let cats = label.feature.kind.categories().unwrap_or(&[]);
    let mut counts = alloc::vec![0usize; cats.len()];
    for &c in &classes {
        counts[c as usize] += 1;
    }
    for (c, &count) in counts.iter().enumerate() {
        if count > 0 && count < cfg.folds {
            return Err(Error::Stratification {
                class: cats[c].clone(),
                count,
                folds: cfg.folds,
            });
        }
    }
    let assignment = stratified_folds(&classes, cfg.folds, rng::derive(cfg.seed, FOLD_SALT));
    let mut plans = Vec::with_capacity(cfg.folds);
    for fold in 0..cfg.folds {
        let test_rows: Vec<usize> = (0..classes.len()).filter(|&r| assignment[r] == fold).collect();
        let mut by_class: Vec<Vec<usize>> = alloc::vec![Vec::new(); cats.len()];
        for r in (0..classes.len()).filter(|&r| assignment[r] != fold) {
            by_class[classes[r] as usize].push(r);
        }
        let mut r = rng::seeded(rng::derive(cfg.fold_seed(fold), ALPHA_SALT));
        let mut reduced_rows = Vec::new();
        for g in &mut by_class {
            if g.is_empty() {
                continue;
            }
            g.shuffle(&mut r);
            let keep = round_half_up(cfg.alpha * g.len() as f64).clamp(1, g.len());
            reduced_rows.extend_from_slice(&g[..keep]);
        }
        reduced_rows.sort_unstable();
        plans.push(FoldPlan {
            test_rows,
            reduced_rows,
        });
    }
    Ok(plans)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcceptedFeature {
    pub name: String,
    pub source_dataset: String,
    pub source_target: String,
    pub utility: f64,
    pub information_gain: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    /// Number of accepted features added, in acceptance order.
    pub features: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub learner: String,
    pub baseline: f64,
    pub enhanced: f64,
    pub train_rows: usize,
    pub test_rows: usize,
    pub accepted: Vec<AcceptedFeature>,
    /// Test accuracy after each group of accepted features.
    pub curve: Vec<CurvePoint>,
    /// Per auxiliary, in configuration order.
    pub shared_counts: Vec<usize>,
    pub aux_only_counts: Vec<usize>,
}

impl FoldResult {
    /// Curve accuracy with at most `m` accepted features.
    pub fn accuracy_at(&self, m: usize) -> f64 {
        self.curve
            .iter()
            .filter(|p| p.features <= m)
            .last()
            .map_or(self.baseline, |p| p.accuracy)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerSummary {
    pub learner: String,
    pub baseline_mean: f64,
    pub enhanced_mean: f64,
    pub delta: f64,
    #[serde(with = "extended_f64")]
    pub t: f64,
    pub p: f64,
    /// p < 0.05 and a positive delta.
    pub significant: bool,
    /// Folds where the enhanced accuracy beats the baseline.
    pub positive_folds: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuxStats {
    pub name: String,
    pub avg_shared: f64,
    pub avg_aux_only: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    /// Fold-major, then learner in configuration order.
    pub folds: Vec<FoldResult>,
    pub learners: Vec<LearnerSummary>,
    pub auxiliaries: Vec<AuxStats>,
}

impl ExperimentReport {
    pub fn folds_of<'a>(&'a self, learner: &'a str) -> impl Iterator<Item = &'a FoldResult> + 'a {
        self.folds.iter().filter(move |f| f.learner == learner)
    }

    /// Plain-text summary: one row per learner with both mean accuracies.
    pub fn table(&self, train_name: &str, alpha: f64) -> String {
        let aux: Vec<&str> = self.auxiliaries.iter().map(|a| a.name.as_str()).collect();
        let aux = if aux.is_empty() { "-".to_string() } else { aux.join(", ") };
        let mut s = String::new();
        let _ = writeln!(s, "{:<24} {:<24} {:<12} {:>8} {:>8} {:>8} {:>9} {:>10}", "Dataset", "Auxiliary", "Learner", "Base", "FG", "Delta", "t", "p");
        for l in &self.learners {
            let mark = if l.significant { "*" } else { "" };
            let _ = writeln!(
                s,
                "{:<24} {:<24} {:<12} {:>8.3} {:>7.3}{:1} {:>+8.3} {:>9.3} {:>10.4}",
                alloc::format!("{train_name}^{alpha}"),
                aux,
                l.learner,
                l.baseline_mean,
                l.enhanced_mean,
                mark,
                l.delta,
                l.t,
                l.p
            );
        }
        if !self.auxiliaries.is_empty() {
            let _ = writeln!(s);
            let _ = writeln!(s, "{:<24} {:>10} {:>10}", "Auxiliary", "AVG |F∩|", "AVG |F⁻|");
            for a in &self.auxiliaries {
                let _ = writeln!(s, "{:<24} {:>10.1} {:>10.1}", a.name, a.avg_shared, a.avg_aux_only);
            }
        }
        s
    }
}

/// [`run_protocol_with`] on the calling thread.
pub fn run_protocol(train: &Dataset, auxiliaries: &[ProtocolAux], cfg: &ProtocolConfig) -> Result<ExperimentReport> {
    run_protocol_with(&Sequential, train, auxiliaries, cfg)
}

/// Runs the testing protocol. The (fold, learner) cells are independent and
/// go through `exec`; the report does not depend on the executor.
pub fn run_protocol_with<E: Executor>(
    exec: &E,
    train: &Dataset,
    auxiliaries: &[ProtocolAux],
    cfg: &ProtocolConfig,
) -> Result<ExperimentReport> {
    let plans = plan_folds(train, cfg)?;
    let mut names = BTreeSet::new();
    for a in auxiliaries {
        a.strategy.validate()?;
        if !names.insert(a.name.as_str()) {
            return Err(Error::InvalidConfig(alloc::format!("auxiliary name `{}` is used twice", a.name)));
        }
    }
    let n_learners = cfg.primary_specs.len();
    let cells = exec.map(plans.len() * n_learners, |i| {
        let (fold, l) = (i / n_learners, i % n_learners);
        run_cell(train, auxiliaries, cfg, fold, &plans[fold], &cfg.primary_specs[l])
    });
    let folds = cells.into_iter().collect::<Result<Vec<_>>>()?;

    let mut learners_out = Vec::with_capacity(n_learners);
    for (l, spec) in cfg.primary_specs.iter().enumerate() {
        let rows: Vec<&FoldResult> = folds.iter().skip(l).step_by(n_learners).collect();
        let base: Vec<f64> = rows.iter().map(|f| f.baseline).collect();
        let enh: Vec<f64> = rows.iter().map(|f| f.enhanced).collect();
        let k = rows.len() as f64;
        let baseline_mean = base.iter().sum::<f64>() / k;
        let enhanced_mean = enh.iter().sum::<f64>() / k;
        let delta = enh.iter().zip(&base).map(|(e, b)| e - b).sum::<f64>() / k;
        let tt = paired_t_test(&enh, &base)?;
        learners_out.push(LearnerSummary {
            learner: spec.short_name(),
            baseline_mean,
            enhanced_mean,
            delta,
            t: tt.t,
            p: tt.p,
            significant: tt.p < SIGNIFICANCE && delta > 0.0,
            positive_folds: rows.iter().filter(|f| f.enhanced > f.baseline).count(),
        });
    }
    let n_cells = folds.len().max(1) as f64;
    let auxiliaries_out = auxiliaries
        .iter()
        .enumerate()
        .map(|(a, aux)| AuxStats {
            name: aux.name.clone(),
            avg_shared: folds.iter().map(|f| f.shared_counts[a] as f64).sum::<f64>() / n_cells,
            avg_aux_only: folds.iter().map(|f| f.aux_only_counts[a] as f64).sum::<f64>() / n_cells,
        })
        .collect();
    Ok(ExperimentReport {
        folds,
        learners: learners_out,
        auxiliaries: auxiliaries_out,
    })
}

fn test_accuracy(spec: &LearnerSpec, fit_on: &Dataset, test: &Dataset) -> Result<f64> {
    let predictor = learners::fit(spec, fit_on, Target::Label)?;
    let predicted = learners::predict(&predictor, test)?;
    Ok(accuracy(&predicted.values, &test.label().expect("labeled").values))
}

fn run_cell(
    train: &Dataset,
    auxiliaries: &[ProtocolAux],
    cfg: &ProtocolConfig,
    fold: usize,
    plan: &FoldPlan,
    spec: &LearnerSpec,
) -> Result<FoldResult> {
    let reduced = train.select_rows(&plan.reduced_rows);
    let test = train.select_rows(&plan.test_rows);
    let baseline = test_accuracy(spec, &reduced, &test)?;

    let mut gcfg = cfg.generation.clone();
    gcfg.primary_spec = spec.clone();
    gcfg.seed = cfg.fold_seed(fold);

    let (accepted, shared_counts, aux_only_counts) = if auxiliaries.is_empty() {
        (Vec::new(), Vec::new(), Vec::new())
    } else {
        let matchings = auxiliaries
            .iter()
            .map(|a| match_features(&reduced, &a.data, &a.strategy))
            .collect::<Result<Vec<_>>>()?;
        let views: Vec<Auxiliary<'_>> = auxiliaries
            .iter()
            .zip(&matchings)
            .map(|(a, m)| Auxiliary {
                name: &a.name,
                data: &a.data,
                matching: m,
            })
            .collect();
        let engine = Engine::new(Sequential);
        let pooled = engine.pool(&reduced, &views, &gcfg)?;
        let resolved = resolve_duplicates(pooled.accepted, &reduced, &gcfg)?;
        let selection = engine.select(&reduced, resolved, cfg.top_k_cap, &gcfg)?;
        (selection.accepted, pooled.shared_counts, pooled.aux_only_counts)
    };

    let mut curve = alloc::vec![CurvePoint {
        features: 0,
        accuracy: baseline,
    }];
    let mut enhanced = baseline;
    if !accepted.is_empty() {
        let train_view = enhance(&reduced, &accepted)?;
        let test_view = enhance(&test, &accepted)?;
        let n_base = reduced.n_features();
        let mut counts: Vec<usize> = (1..=accepted.len() / cfg.curve_step).map(|g| g * cfg.curve_step).collect();
        if counts.last() != Some(&accepted.len()) {
            counts.push(accepted.len());
        }
        for m in counts {
            let keep: Vec<&str> = train_view.feature_names().take(n_base + m).collect();
            let acc = test_accuracy(spec, &train_view.project(&keep)?, &test_view.project(&keep)?)?;
            curve.push(CurvePoint {
                features: m,
                accuracy: acc,
            });
        }
        enhanced = curve.last().expect("non-empty").accuracy;
    }
    Ok(FoldResult {
        fold,
        learner: spec.short_name(),
        baseline,
        enhanced,
        train_rows: reduced.n_rows(),
        test_rows: test.n_rows(),
        accepted: accepted.iter().map(summarize).collect(),
        curve,
        shared_counts,
        aux_only_counts,
    })
}

fn summarize(f: &GeneratedFeature) -> AcceptedFeature {
    AcceptedFeature {
        name: f.name.clone(),
        source_dataset: f.source_dataset(),
        source_target: f.source_target.clone(),
        utility: f.utility_at_acceptance,
        information_gain: f.information_gain,
    }
}

#[cfg(test)]
mod tests;
