//! Knowledge-based feature generation.
//!
//! For every feature that only the auxiliary dataset has, a secondary learner
//! is trained on the auxiliary rows to predict it from the shared features.
//! The fitted predictor is applied to the training rows, and the resulting
//! column is kept only if it strictly raises the cross-validated accuracy of
//! the primary learner on the training set (a wrapper test).
//!
//! Value representation of a generated column: binary classifiers emit the
//! positive-class score (continuous, in [0, 1]); multiclass classifiers emit
//! the predicted category; regressors emit the predicted number.

mod duplicates;
mod prioritize;

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::exec::{Executor, Sequential};
use crate::learners::{self, cross_val_accuracy, information_gain, LearnerSpec, Predictor, Target};
use crate::matching::{EmbeddingTable, FeatureMatching};
use crate::rng;
use crate::tabular::{Dataset, Feature, FeatureKind, Label, Value};
use crate::{Error, Result};

pub use duplicates::resolve_duplicates;
pub use prioritize::prioritize_targets;

const WRAPPER_SALT: u64 = 0x5752_4150;
const SECONDARY_SALT: u64 = 0x5345_434f;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DuplicatePolicy {
    /// Keep the approximation with the highest wrapper utility on train.
    #[default]
    ArgmaxUtility,
    /// Average (continuous) or vote (nominal) over all approximations.
    Committee,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerationConfig {
    /// Learner for the auxiliary-side tasks.
    pub secondary_spec: LearnerSpec,
    /// Learner whose cross-validated accuracy decides acceptance.
    pub primary_spec: LearnerSpec,
    pub wrapper_folds: usize,
    /// Add each accepted feature to the shared set before the next target.
    pub recurrent: bool,
    /// At most this many targets per auxiliary dataset, after prioritization.
    pub max_targets: Option<usize>,
    /// Rank targets by embedding similarity to the training classes.
    pub prioritization: Option<EmbeddingTable>,
    pub duplicate_policy: DuplicatePolicy,
    /// Larger shared sets are reduced to this many features, by information
    /// gain about the secondary target, before a secondary fit.
    pub intersection_cap: usize,
    /// Whether the auxiliary label is itself a generation target.
    pub include_aux_label: bool,
    pub seed: u64,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        GenerationConfig {
            secondary_spec: LearnerSpec::random_forest(),
            primary_spec: LearnerSpec::decision_tree(),
            wrapper_folds: 5,
            recurrent: false,
            max_targets: None,
            prioritization: None,
            duplicate_policy: DuplicatePolicy::ArgmaxUtility,
            intersection_cap: 200,
            include_aux_label: true,
            seed: 0,
        }
    }
}

impl GenerationConfig {
    pub fn validate(&self) -> Result<()> {
        self.secondary_spec.validate()?;
        self.primary_spec.validate()?;
        if self.wrapper_folds < 2 {
            return Err(Error::InvalidConfig("wrapper_folds must be at least 2".into()));
        }
        if self.max_targets == Some(0) {
            return Err(Error::InvalidConfig("max_targets must be at least 1".into()));
        }
        if self.intersection_cap == 0 {
            return Err(Error::InvalidConfig("intersection_cap must be at least 1".into()));
        }
        Ok(())
    }

    fn wrapper_seed(&self) -> u64 {
        rng::derive(self.seed, WRAPPER_SALT)
    }

    /// Cross-validated accuracy of the primary learner on `view`.
    pub fn wrapper_cv(&self, view: &Dataset) -> Result<f64> {
        cross_val_accuracy(
            &self.primary_spec,
            view,
            Target::Label,
            self.wrapper_folds,
            self.wrapper_seed(),
        )
    }
}

/// A shared feature as seen from both sides: the predictor input is named
/// after the training feature and fed from the auxiliary column.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputBinding {
    pub train: String,
    pub aux: String,
}

/// One learned approximation of an auxiliary feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Approximation {
    pub source_dataset: String,
    pub predictor: Predictor,
    pub inputs: Vec<InputBinding>,
}

impl Approximation {
    /// Generated values for the rows of `data`, whose features use training names.
    pub fn values(&self, data: &Dataset) -> Result<Vec<Value>> {
        let out = learners::predict(&self.predictor, data)?;
        Ok(match out.positive_scores {
            Some(scores) => scores.into_iter().map(Value::Num).collect(),
            None => out.values,
        })
    }

    /// Generated values for the rows of the auxiliary dataset it was learned on.
    pub fn values_on_aux(&self, aux: &Dataset) -> Result<Vec<Value>> {
        let mut features = Vec::new();
        let mut columns = Vec::new();
        for f in self.predictor.input_features() {
            let b = self
                .inputs
                .iter()
                .find(|b| b.train == f.name)
                .ok_or_else(|| Error::UnknownFeature(f.name.clone()))?;
            let (src_kind, col) = aux_column(aux, &b.aux)?;
            features.push(f.clone());
            columns.push(represent(src_kind, col, &f.kind));
        }
        let view = Dataset::new(features, columns, aux.n_rows(), None)?;
        self.values(&view)
    }
}

/// Output kind of a generated feature for a secondary target of kind `target`.
pub fn generated_kind(target: &FeatureKind) -> FeatureKind {
    match target {
        FeatureKind::Nominal { categories } if categories.len() == 2 => FeatureKind::Continuous,
        other => other.clone(),
    }
}

/// Converts target values to the generated representation (binary
/// categories become 0/1 numbers).
fn represent(source: &FeatureKind, values: &[Value], to: &FeatureKind) -> Vec<Value> {
    match (source, to) {
        (FeatureKind::Nominal { .. }, FeatureKind::Continuous) => values
            .iter()
            .map(|v| v.as_cat().map_or(Value::Missing, |c| Value::Num(c as f64)))
            .collect(),
        _ => values.to_vec(),
    }
}

fn aux_column<'a>(aux: &'a Dataset, name: &str) -> Result<(&'a FeatureKind, &'a [Value])> {
    if let Some(i) = aux.feature_index(name) {
        return Ok((&aux.features()[i].kind, aux.column(i)));
    }
    match aux.label() {
        Some(l) if l.feature.name == name => Ok((&l.feature.kind, &l.values)),
        _ => Err(Error::UnknownFeature(name.to_string())),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratedFeature {
    pub name: String,
    pub kind: FeatureKind,
    /// Auxiliary feature (or label) this column approximates.
    pub source_target: String,
    /// One entry normally; several for a committee.
    pub approximations: Vec<Approximation>,
    /// Wrapper accuracy gain when the feature was accepted.
    pub utility_at_acceptance: f64,
    /// Information gain about the training label, in bits.
    pub information_gain: f64,
}

impl GeneratedFeature {
    pub fn feature(&self) -> Feature {
        Feature::new(self.name.clone(), self.kind.clone())
    }

    /// Source dataset name; committee members are joined with `+`.
    pub fn source_dataset(&self) -> String {
        let names: Vec<&str> = self.approximations.iter().map(|a| a.source_dataset.as_str()).collect();
        names.join("+")
    }

    pub fn is_committee(&self) -> bool {
        self.approximations.len() > 1
    }

    /// Training-side names of every predictor input.
    pub fn input_names(&self) -> BTreeSet<&str> {
        self.approximations
            .iter()
            .flat_map(|a| a.predictor.input_features().iter().map(|f| f.name.as_str()))
            .collect()
    }

    /// Values on `data`, which must contain every input by name and kind.
    pub fn values(&self, data: &Dataset) -> Result<Vec<Value>> {
        let outputs = self
            .approximations
            .iter()
            .map(|a| a.values(data))
            .collect::<Result<Vec<_>>>()?;
        Ok(combine(&self.kind, &outputs, data.n_rows()))
    }

    /// Values on the auxiliary dataset called `source`.
    pub fn values_on_aux(&self, source: &str, aux: &Dataset) -> Result<Vec<Value>> {
        let a = self
            .approximations
            .iter()
            .find(|a| a.source_dataset == source)
            .ok_or_else(|| Error::InvalidConfig(alloc::format!("`{}` was not learned from `{source}`", self.name)))?;
        a.values_on_aux(aux)
    }
}

/// Row-wise mean (continuous) or plurality vote with ties to the lowest
/// category (nominal) over member outputs.
fn combine(kind: &FeatureKind, outputs: &[Vec<Value>], n_rows: usize) -> Vec<Value> {
    if outputs.len() == 1 {
        return outputs[0].clone();
    }
    (0..n_rows)
        .map(|r| match kind {
            FeatureKind::Continuous => {
                let xs: Vec<f64> = outputs.iter().filter_map(|o| o[r].as_num()).collect();
                if xs.is_empty() {
                    Value::Missing
                } else {
                    Value::Num(xs.iter().sum::<f64>() / xs.len() as f64)
                }
            }
            FeatureKind::Nominal { categories } => {
                let mut votes = alloc::vec![0.0; categories.len()];
                let mut any = false;
                for c in outputs.iter().filter_map(|o| o[r].as_cat()) {
                    votes[c as usize] += 1.0;
                    any = true;
                }
                if any {
                    Value::Cat(learners::argmax(&votes))
                } else {
                    Value::Missing
                }
            }
        })
        .collect()
}

/// Appends the generated features to `train`, in order. Later features may
/// use earlier ones as inputs.
pub fn enhance(train: &Dataset, features: &[GeneratedFeature]) -> Result<Dataset> {
    let mut view = train.clone();
    for f in features {
        let values = f.values(&view)?;
        view = view.append_feature(f.feature(), values)?;
    }
    Ok(view)
}

/// An auxiliary dataset with its matching against the training set.
#[derive(Debug, Clone, Copy)]
pub struct Auxiliary<'a> {
    pub name: &'a str,
    pub data: &'a Dataset,
    pub matching: &'a FeatureMatching,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum CandidateOutcome {
    Skipped { reason: String },
    Rejected { cv: f64, baseline: f64 },
    Accepted { name: String, cv: f64, baseline: f64 },
}

/// What happened to one target during a single-auxiliary run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateRecord {
    pub source_dataset: String,
    pub target: String,
    /// The target is the auxiliary label rather than a feature.
    pub is_label: bool,
    #[serde(flatten)]
    pub outcome: CandidateOutcome,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KbfgRun {
    pub accepted: Vec<GeneratedFeature>,
    pub candidates: Vec<CandidateRecord>,
    /// Shared feature count and auxiliary-only feature count.
    pub n_shared: usize,
    pub n_aux_only: usize,
}

/// Result of ranking pooled candidates and re-filtering them.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub accepted: Vec<GeneratedFeature>,
    /// Candidates in the order they were tested, with their information gain.
    pub ranked: Vec<(String, f64)>,
}

/// Shared features as seen on the auxiliary side, under training names.
struct WorkingSet {
    features: Vec<Feature>,
    aux_names: Vec<String>,
    columns: Vec<Vec<Value>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum TargetRef {
    Feature(String),
    Label(String),
}

impl TargetRef {
    fn name(&self) -> &str {
        match self {
            TargetRef::Feature(n) | TargetRef::Label(n) => n,
        }
    }
}

enum Fitted {
    Skipped(String),
    Ready(Approximation, FeatureKind),
}

/// Labeled training rows and their classes.
pub(crate) fn label_classes(train: &Dataset) -> Result<(Vec<usize>, Vec<u32>)> {
    let label = train.label().ok_or(Error::Unlabeled)?;
    if !label.feature.kind.is_nominal() {
        return Err(Error::NotClassification(label.feature.name.clone()));
    }
    Ok(label
        .values
        .iter()
        .enumerate()
        .filter_map(|(r, v)| v.as_cat().map(|c| (r, c)))
        .unzip())
}

/// Information gain of `values` about the training label.
pub fn gain_on(train: &Dataset, values: &[Value]) -> Result<f64> {
    let (rows, classes) = label_classes(train)?;
    let picked: Vec<Value> = rows.iter().map(|&r| values[r]).collect();
    Ok(information_gain(&picked, &classes))
}

fn unique_name(base: &str, taken: impl Fn(&str) -> bool) -> String {
    if !taken(base) {
        return base.to_string();
    }
    (2..)
        .map(|i| alloc::format!("{base}_{i}"))
        .find(|n| !taken(n))
        .expect("unbounded suffixes")
}

fn name_taken(view: &Dataset, reserved: &BTreeSet<String>, name: &str) -> bool {
    view.feature_index(name).is_some()
        || view.label().is_some_and(|l| l.feature.name == name)
        || reserved.contains(name)
}

/// Generation engine; `E` decides how independent work items are run.
#[derive(Debug, Clone, Default)]
pub struct Engine<E = Sequential> {
    exec: E,
}

impl<E: Executor> Engine<E> {
    pub fn new(exec: E) -> Self {
        Engine { exec }
    }

    pub fn executor(&self) -> &E {
        &self.exec
    }

    /// Single-auxiliary generation; returns accepted features in acceptance order.
    pub fn kbfg(&self, train: &Dataset, aux: &Auxiliary<'_>, cfg: &GenerationConfig) -> Result<Vec<GeneratedFeature>> {
        Ok(self.kbfg_run(train, aux, cfg, &BTreeSet::new())?.accepted)
    }

    /// Like [`Engine::kbfg`], also reporting every target considered. Names
    /// in `reserved` are avoided for new features.
    pub fn kbfg_run(
        &self,
        train: &Dataset,
        aux: &Auxiliary<'_>,
        cfg: &GenerationConfig,
        reserved: &BTreeSet<String>,
    ) -> Result<KbfgRun> {
        cfg.validate()?;
        label_classes(train)?;
        let mut ws = working_set(train, aux)?;
        let n_shared = ws.features.len();
        let n_aux_only = aux
            .matching
            .unmatched_aux
            .iter()
            .filter(|n| aux.data.feature_index(n).is_some())
            .count();
        if ws.features.is_empty() {
            log::warn!("no shared features with `{}`; nothing to learn", aux.name);
            return Ok(KbfgRun {
                accepted: Vec::new(),
                candidates: Vec::new(),
                n_shared,
                n_aux_only,
            });
        }
        let n_labeled = label_classes(train)?.0.len();
        if n_labeled < cfg.wrapper_folds {
            return Err(Error::TooFewRows {
                needed: cfg.wrapper_folds,
                have: n_labeled,
            });
        }
        let order = aux.data.canonical_row_order();
        let aux_data = aux.data.select_rows(&order);
        for col in &mut ws.columns {
            *col = order.iter().map(|&r| col[r]).collect();
        }
        let targets = self.targets(train, aux, &ws, cfg)?;

        let mut view = train.clone();
        let mut baseline = cfg.wrapper_cv(&view)?;
        let mut pre: Vec<Option<Result<Fitted>>> = if cfg.recurrent {
            Vec::new()
        } else {
            self.exec
                .map(targets.len(), |i| Some(fit_secondary(&ws, &aux_data, aux.name, &targets[i], cfg)))
        };
        let mut accepted = Vec::new();
        let mut candidates = Vec::new();
        for (i, target) in targets.iter().enumerate() {
            let fitted = match pre.get_mut(i).and_then(Option::take) {
                Some(r) => r?,
                None => fit_secondary(&ws, &aux_data, aux.name, target, cfg)?,
            };
            let record = |outcome| CandidateRecord {
                source_dataset: aux.name.to_string(),
                target: target.name().to_string(),
                is_label: matches!(target, TargetRef::Label(_)),
                outcome,
            };
            let (approx, kind) = match fitted {
                Fitted::Skipped(reason) => {
                    log::debug!("target `{}` skipped: {reason}", target.name());
                    candidates.push(record(CandidateOutcome::Skipped { reason }));
                    continue;
                }
                Fitted::Ready(a, k) => (a, k),
            };
            let base = alloc::format!("gen_{}_{}", aux.name, target.name());
            let name = unique_name(&base, |n| name_taken(&view, reserved, n));
            let mut gf = GeneratedFeature {
                name,
                kind,
                source_target: target.name().to_string(),
                approximations: alloc::vec![approx],
                utility_at_acceptance: 0.0,
                information_gain: 0.0,
            };
            let values = gf.values(&view)?;
            let candidate_view = view.append_feature(gf.feature(), values.clone())?;
            let cv = cfg.wrapper_cv(&candidate_view)?;
            if cv > baseline {
                candidates.push(record(CandidateOutcome::Accepted {
                    name: gf.name.clone(),
                    cv,
                    baseline,
                }));
                gf.utility_at_acceptance = cv - baseline;
                gf.information_gain = gain_on(train, &values)?;
                if cfg.recurrent {
                    let (src_kind, col) = aux_column(&aux_data, target.name())?;
                    ws.features.push(gf.feature());
                    ws.aux_names.push(target.name().to_string());
                    ws.columns.push(represent(src_kind, col, &gf.kind));
                }
                view = candidate_view;
                baseline = cv;
                accepted.push(gf);
            } else {
                candidates.push(record(CandidateOutcome::Rejected { cv, baseline }));
            }
        }
        Ok(KbfgRun {
            accepted,
            candidates,
            n_shared,
            n_aux_only,
        })
    }

    /// Target order: auxiliary-only features in schema order (or ranked by
    /// prioritization), then the auxiliary label; capped at `max_targets`.
    fn targets(
        &self,
        train: &Dataset,
        aux: &Auxiliary<'_>,
        ws: &WorkingSet,
        cfg: &GenerationConfig,
    ) -> Result<Vec<TargetRef>> {
        let mut names: Vec<String> = aux
            .data
            .feature_names()
            .filter(|n| aux.matching.unmatched_aux.iter().any(|u| u == n))
            .map(ToString::to_string)
            .collect();
        if let Some(table) = &cfg.prioritization {
            let shared: Vec<String> = ws.features.iter().map(|f| f.name.clone()).collect();
            names = prioritize_targets(&names, train, &shared, table)?;
        }
        let mut targets: Vec<TargetRef> = names.into_iter().map(TargetRef::Feature).collect();
        if cfg.include_aux_label {
            if let Some(l) = aux.data.label() {
                targets.push(TargetRef::Label(l.feature.name.clone()));
            }
        }
        if let Some(m) = cfg.max_targets {
            targets.truncate(m);
        }
        Ok(targets)
    }

    /// Multi-auxiliary generation: per-auxiliary runs, duplicate resolution,
    /// then ranking by information gain and a second wrapper pass.
    pub fn kbfg_star(
        &self,
        train: &Dataset,
        auxiliaries: &[Auxiliary<'_>],
        cfg: &GenerationConfig,
    ) -> Result<Vec<GeneratedFeature>> {
        let pooled = self.pool(train, auxiliaries, cfg)?;
        let resolved = resolve_duplicates(pooled.accepted, train, cfg)?;
        Ok(self.select(train, resolved, None, cfg)?.accepted)
    }

    /// Runs every auxiliary independently and concatenates the accepted features.
    pub fn pool(&self, train: &Dataset, auxiliaries: &[Auxiliary<'_>], cfg: &GenerationConfig) -> Result<Pooled> {
        if auxiliaries.is_empty() {
            return Err(Error::InvalidConfig("at least one auxiliary dataset is required".into()));
        }
        let mut names = BTreeSet::new();
        for a in auxiliaries {
            if !names.insert(a.name) {
                return Err(Error::InvalidConfig(alloc::format!("auxiliary name `{}` is used twice", a.name)));
            }
        }
        let mut reserved = BTreeSet::new();
        let mut out = Pooled::default();
        for a in auxiliaries {
            let run = self.kbfg_run(train, a, cfg, &reserved)?;
            reserved.extend(run.accepted.iter().map(|f| f.name.clone()));
            out.shared_counts.push(run.n_shared);
            out.aux_only_counts.push(run.n_aux_only);
            out.candidates.extend(run.candidates);
            out.accepted.extend(run.accepted);
        }
        Ok(out)
    }

    /// Sorts `candidates` by information gain on `train` (descending, stable),
    /// keeps the first `cap`, and accepts each one that strictly improves the
    /// wrapper accuracy over the features accepted so far. A candidate whose
    /// inputs include a generated feature that has not been accepted is skipped.
    pub fn select(
        &self,
        train: &Dataset,
        mut candidates: Vec<GeneratedFeature>,
        cap: Option<usize>,
        cfg: &GenerationConfig,
    ) -> Result<Selection> {
        cfg.validate()?;
        candidates.sort_by(|a, b| b.information_gain.total_cmp(&a.information_gain));
        if let Some(c) = cap {
            candidates.truncate(c);
        }
        let ranked = candidates
            .iter()
            .map(|c| (c.name.clone(), c.information_gain))
            .collect();
        let mut view = train.clone();
        let mut baseline = cfg.wrapper_cv(&view)?;
        let mut accepted = Vec::new();
        for mut c in candidates {
            let values = match c.values(&view) {
                Ok(v) => v,
                Err(Error::UnknownFeature(missing)) => {
                    log::debug!("`{}` skipped: input `{missing}` was not accepted", c.name);
                    continue;
                }
                Err(e) => return Err(e),
            };
            let candidate_view = view.append_feature(c.feature(), values)?;
            let cv = cfg.wrapper_cv(&candidate_view)?;
            if cv > baseline {
                c.utility_at_acceptance = cv - baseline;
                view = candidate_view;
                baseline = cv;
                accepted.push(c);
            }
        }
        Ok(Selection { accepted, ranked })
    }
}

/// Output of [`Engine::pool`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Pooled {
    pub accepted: Vec<GeneratedFeature>,
    pub candidates: Vec<CandidateRecord>,
    /// Per auxiliary, in input order.
    pub shared_counts: Vec<usize>,
    pub aux_only_counts: Vec<usize>,
}

fn working_set(train: &Dataset, aux: &Auxiliary<'_>) -> Result<WorkingSet> {
    let mut pairs: Vec<(usize, &str, &str)> = Vec::new();
    for p in &aux.matching.pairs {
        let ti = train
            .feature_index(&p.train)
            .ok_or_else(|| Error::Matching(alloc::format!("unknown train feature `{}`", p.train)))?;
        let ai = aux
            .data
            .feature_index(&p.aux)
            .ok_or_else(|| Error::Matching(alloc::format!("unknown aux feature `{}`", p.aux)))?;
        if train.features()[ti].kind != aux.data.features()[ai].kind {
            return Err(Error::Matching(alloc::format!(
                "`{}` and `{}` have different kinds",
                p.train,
                p.aux
            )));
        }
        pairs.push((ti, &p.train, &p.aux));
    }
    pairs.sort_by_key(|p| p.0);
    Ok(WorkingSet {
        features: pairs.iter().map(|p| train.features()[p.0].clone()).collect(),
        aux_names: pairs.iter().map(|p| p.2.to_string()).collect(),
        columns: pairs
            .iter()
            .map(|p| aux.data.column_by_name(p.2).expect("checked above").to_vec())
            .collect(),
    })
}

/// Indices of the shared features to use for one target: all of them, or
/// the `cap` most informative about the target when there are more.
/// Continuous targets are split at their median for this ranking.
fn select_inputs(ws: &WorkingSet, tkind: &FeatureKind, tvals: &[Value], cap: usize) -> Vec<usize> {
    let n = ws.features.len();
    if n <= cap {
        return (0..n).collect();
    }
    let rows: Vec<usize> = (0..tvals.len()).filter(|&r| !tvals[r].is_missing()).collect();
    let labels: Vec<u32> = match tkind {
        FeatureKind::Nominal { .. } => rows.iter().filter_map(|&r| tvals[r].as_cat()).collect(),
        FeatureKind::Continuous => {
            let mut xs: Vec<f64> = rows.iter().filter_map(|&r| tvals[r].as_num()).collect();
            xs.sort_by(f64::total_cmp);
            let m = xs.len();
            let median = if m % 2 == 1 {
                xs[m / 2]
            } else {
                (xs[m / 2 - 1] + xs[m / 2]) / 2.0
            };
            rows.iter()
                .map(|&r| u32::from(tvals[r].as_num().is_some_and(|x| x > median)))
                .collect()
        }
    };
    let gains: Vec<f64> = ws
        .columns
        .iter()
        .map(|col| {
            let vals: Vec<Value> = rows.iter().map(|&r| col[r]).collect();
            information_gain(&vals, &labels)
        })
        .collect();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| gains[b].total_cmp(&gains[a]));
    idx.truncate(cap);
    idx.sort_unstable();
    idx
}

fn fit_secondary(
    ws: &WorkingSet,
    aux: &Dataset,
    source: &str,
    target: &TargetRef,
    cfg: &GenerationConfig,
) -> Result<Fitted> {
    let (tkind, tvals) = aux_column(aux, target.name())?;
    let observed: Vec<&Value> = tvals.iter().filter(|v| !v.is_missing()).collect();
    if observed.len() < 2 {
        return Ok(Fitted::Skipped("fewer than two observed target values".into()));
    }
    if tkind.is_nominal() && observed.iter().all(|v| *v == observed[0]) {
        return Ok(Fitted::Skipped("target has a single class".into()));
    }
    let sel = select_inputs(ws, tkind, tvals, cfg.intersection_cap);
    let features: Vec<Feature> = sel.iter().map(|&i| ws.features[i].clone()).collect();
    let columns: Vec<Vec<Value>> = sel.iter().map(|&i| ws.columns[i].clone()).collect();
    let label_name = unique_name(target.name(), |n| features.iter().any(|f| f.name == n));
    let data = Dataset::new(
        features,
        columns,
        aux.n_rows(),
        Some(Label {
            feature: Feature::new(label_name, tkind.clone()),
            values: tvals.to_vec(),
        }),
    )?;
    let seed = rng::derive(
        rng::derive(cfg.seed ^ cfg.secondary_spec.seed, SECONDARY_SALT),
        rng::hash_str(source) ^ rng::hash_str(target.name()).rotate_left(17),
    );
    let spec = cfg.secondary_spec.clone().with_seed(seed);
    let predictor = match learners::fit(&spec, &data, Target::Label) {
        Ok(p) => p,
        Err(Error::LinearRegression) => {
            return Ok(Fitted::Skipped("the secondary learner cannot fit a continuous target".into()))
        }
        Err(e @ (Error::SingleClass(_) | Error::TooFewRows { .. })) => {
            return Ok(Fitted::Skipped(e.to_string()));
        }
        Err(e) => return Err(e),
    };
    let inputs = sel
        .iter()
        .map(|&i| InputBinding {
            train: ws.features[i].name.clone(),
            aux: ws.aux_names[i].clone(),
        })
        .collect();
    Ok(Fitted::Ready(
        Approximation {
            source_dataset: source.to_string(),
            predictor,
            inputs,
        },
        generated_kind(tkind),
    ))
}

/// [`Engine::kbfg`] on the calling thread.
pub fn kbfg(train: &Dataset, aux: &Auxiliary<'_>, cfg: &GenerationConfig) -> Result<Vec<GeneratedFeature>> {
    Engine::new(Sequential).kbfg(train, aux, cfg)
}

/// [`Engine::kbfg_star`] on the calling thread.
pub fn kbfg_star(train: &Dataset, auxiliaries: &[Auxiliary<'_>], cfg: &GenerationConfig) -> Result<Vec<GeneratedFeature>> {
    Engine::new(Sequential).kbfg_star(train, auxiliaries, cfg)
}

#[cfg(test)]
pub(crate) mod tests;
