//! Built-in supervised learners, cross-validation and feature scoring.
//!
//! Every learner handles both nominal and continuous inputs. Missing input
//! cells are imputed with statistics taken from the training rows (mean for
//! continuous, mode for nominal) and the same fill values are reused at
//! prediction time.

mod cv;
mod encode;
mod forest;
mod info;
mod knn;
mod linear;
mod tree;

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::tabular::{Dataset, Feature, FeatureKind, Value};
use crate::{Error, Result};

pub use cv::{cross_val_accuracy, cross_val_accuracy_with_folds, stratified_folds};
pub use info::{entropy, information_gain};

use encode::{Columns, Fill};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TreeParams {
    /// `None` grows until leaves are pure.
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    /// Reduced-error pruning against a 20% holdout of the training rows.
    pub pruning: bool,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: None,
            min_samples_leaf: 1,
            pruning: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestParams {
    pub trees: usize,
    /// Fraction of features considered at each split; `None` means √|F|/|F|.
    pub feature_fraction: Option<f64>,
    pub bootstrap: bool,
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            trees: 50,
            feature_fraction: None,
            bootstrap: true,
            max_depth: None,
            min_samples_leaf: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KnnParams {
    pub k: usize,
}

impl Default for KnnParams {
    fn default() -> Self {
        KnnParams { k: 3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LinearParams {
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
}

impl Default for LinearParams {
    fn default() -> Self {
        LinearParams {
            learning_rate: 0.5,
            epochs: 300,
            l2: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "snake_case")]
pub enum Algorithm {
    DecisionTree(TreeParams),
    RandomForest(ForestParams),
    KNearestNeighbors(KnnParams),
    /// Multinomial logistic regression trained by full-batch gradient descent.
    LinearClassifier(LinearParams),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerSpec {
    #[serde(flatten)]
    pub algorithm: Algorithm,
    #[serde(default)]
    pub seed: u64,
}

impl LearnerSpec {
    pub fn new(algorithm: Algorithm) -> Self {
        LearnerSpec { algorithm, seed: 0 }
    }

    pub fn decision_tree() -> Self {
        LearnerSpec::new(Algorithm::DecisionTree(TreeParams::default()))
    }

    pub fn unpruned_tree() -> Self {
        LearnerSpec::new(Algorithm::DecisionTree(TreeParams {
            pruning: false,
            ..TreeParams::default()
        }))
    }

    pub fn random_forest() -> Self {
        LearnerSpec::new(Algorithm::RandomForest(ForestParams::default()))
    }

    pub fn knn(k: usize) -> Self {
        LearnerSpec::new(Algorithm::KNearestNeighbors(KnnParams { k }))
    }

    pub fn linear() -> Self {
        LearnerSpec::new(Algorithm::LinearClassifier(LinearParams::default()))
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Column label used in reports.
    pub fn short_name(&self) -> String {
        match &self.algorithm {
            Algorithm::DecisionTree(p) if p.pruning => "DT".into(),
            Algorithm::DecisionTree(_) => "DT-unpruned".into(),
            Algorithm::RandomForest(_) => "RF".into(),
            Algorithm::KNearestNeighbors(p) => alloc::format!("{}NN", p.k),
            Algorithm::LinearClassifier(_) => "Linear".into(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidSpec(msg.into()));
        let positive_depth = |d: &Option<usize>| d.map_or(true, |d| d > 0);
        match &self.algorithm {
            Algorithm::DecisionTree(p) => {
                if !positive_depth(&p.max_depth) {
                    return bad("max_depth must be positive");
                }
                if p.min_samples_leaf == 0 {
                    return bad("min_samples_leaf must be positive");
                }
            }
            Algorithm::RandomForest(p) => {
                if p.trees == 0 {
                    return bad("trees must be positive");
                }
                if let Some(f) = p.feature_fraction {
                    if !(f > 0.0 && f <= 1.0) {
                        return bad("feature_fraction must be in (0, 1]");
                    }
                }
                if !positive_depth(&p.max_depth) {
                    return bad("max_depth must be positive");
                }
                if p.min_samples_leaf == 0 {
                    return bad("min_samples_leaf must be positive");
                }
            }
            Algorithm::KNearestNeighbors(p) => {
                if p.k == 0 {
                    return bad("k must be positive");
                }
            }
            Algorithm::LinearClassifier(p) => {
                if !(p.learning_rate > 0.0 && p.learning_rate.is_finite()) {
                    return bad("learning_rate must be positive");
                }
                if p.epochs == 0 {
                    return bad("epochs must be positive");
                }
                if !(p.l2 > 0.0 && p.l2.is_finite()) {
                    return bad("l2 must be positive");
                }
            }
        }
        Ok(())
    }
}

/// What a learner is asked to predict.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target<'a> {
    Label,
    Feature(&'a str),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum Model {
    Tree(tree::Tree),
    Forest(forest::Forest),
    Knn(knn::Knn),
    Linear(linear::Linear),
}

/// A fitted classifier (nominal target) or regressor (continuous target).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Predictor {
    spec: LearnerSpec,
    input_features: Vec<Feature>,
    target: Feature,
    fills: Vec<Fill>,
    model: Model,
}

/// Output of [`predict`]: one value per row, plus the positive-class score
/// (probability of category index 1) for binary classifiers.
#[derive(Debug, Clone, PartialEq)]
pub struct Predictions {
    pub values: Vec<Value>,
    pub positive_scores: Option<Vec<f64>>,
}

impl Predictor {
    pub fn spec(&self) -> &LearnerSpec {
        &self.spec
    }

    pub fn input_features(&self) -> &[Feature] {
        &self.input_features
    }

    pub fn target(&self) -> &Feature {
        &self.target
    }

    pub fn target_kind(&self) -> &FeatureKind {
        &self.target.kind
    }

    pub fn n_classes(&self) -> Option<usize> {
        self.target.kind.categories().map(<[String]>::len)
    }

    pub fn is_binary_classifier(&self) -> bool {
        self.n_classes() == Some(2)
    }

    /// Number of tree nodes for tree models; `None` for other learners.
    pub fn node_count(&self) -> Option<usize> {
        match &self.model {
            Model::Tree(t) => Some(t.node_count()),
            Model::Forest(f) => Some(f.node_count()),
            _ => None,
        }
    }
}

pub(crate) enum Targets {
    Class { y: Vec<u32>, n_classes: usize },
    Reg(Vec<f64>),
}

impl Targets {
    fn len(&self) -> usize {
        match self {
            Targets::Class { y, .. } => y.len(),
            Targets::Reg(y) => y.len(),
        }
    }
}

/// Raw per-row model output before conversion to [`Predictions`].
pub(crate) enum RawOutput {
    /// Per-row class distribution (sums to one).
    Class(Vec<Vec<f64>>),
    /// Per-row class distribution, plus a separate positive-class score.
    Voted { classes: Vec<u32>, positive: Vec<f64> },
    Reg(Vec<f64>),
}

/// Resolves the target column and the input features of `data`.
fn split_target<'d>(
    data: &'d Dataset,
    target: Target<'_>,
) -> Result<(Feature, &'d [Value], Vec<usize>)> {
    match target {
        Target::Label => {
            let label = data.label().ok_or(Error::Unlabeled)?;
            Ok((label.feature.clone(), &label.values, (0..data.n_features()).collect()))
        }
        Target::Feature(name) => {
            let i = data
                .feature_index(name)
                .ok_or_else(|| Error::UnknownFeature(name.to_string()))?;
            let inputs = (0..data.n_features()).filter(|&j| j != i).collect();
            Ok((data.features()[i].clone(), data.column(i), inputs))
        }
    }
}

struct Prepared {
    target: Feature,
    input_features: Vec<Feature>,
    fills: Vec<Fill>,
    cols: Columns,
    targets: Targets,
}

fn prepare(data: &Dataset, target: Target<'_>) -> Result<Prepared> {
    let (target_feature, target_values, inputs) = split_target(data, target)?;
    if inputs.is_empty() {
        return Err(Error::NoFeatures);
    }
    let rows: Vec<usize> = (0..data.n_rows())
        .filter(|&r| !target_values[r].is_missing())
        .collect();
    if rows.len() < 2 {
        return Err(Error::TooFewRows {
            needed: 2,
            have: rows.len(),
        });
    }
    let targets = match &target_feature.kind {
        FeatureKind::Nominal { categories } => {
            let y: Vec<u32> = rows.iter().filter_map(|&r| target_values[r].as_cat()).collect();
            if y.iter().all(|&c| c == y[0]) {
                return Err(Error::SingleClass(target_feature.name.clone()));
            }
            Targets::Class {
                y,
                n_classes: categories.len(),
            }
        }
        FeatureKind::Continuous => Targets::Reg(rows.iter().filter_map(|&r| target_values[r].as_num()).collect()),
    };
    let input_features: Vec<Feature> = inputs.iter().map(|&j| data.features()[j].clone()).collect();
    let raw_columns: Vec<Vec<Value>> = inputs
        .iter()
        .map(|&j| rows.iter().map(|&r| data.column(j)[r]).collect())
        .collect();
    let fills = encode::fit_fills(&input_features, &raw_columns);
    let cols = encode::encode(&input_features, &raw_columns, &fills);
    Ok(Prepared {
        target: target_feature,
        input_features,
        fills,
        cols,
        targets,
    })
}

/// Fits `spec` on `data` to predict `target` from every other feature.
/// Rows whose target is missing are ignored.
pub fn fit(spec: &LearnerSpec, data: &Dataset, target: Target<'_>) -> Result<Predictor> {
    spec.validate()?;
    let Prepared {
        target,
        input_features,
        fills,
        cols,
        targets,
    } = prepare(data, target)?;
    let model = match &spec.algorithm {
        Algorithm::DecisionTree(p) => Model::Tree(tree::fit_decision_tree(&cols, &targets, p, spec.seed)),
        Algorithm::RandomForest(p) => Model::Forest(forest::Forest::fit(&cols, &targets, p, spec.seed)),
        Algorithm::KNearestNeighbors(p) => Model::Knn(knn::Knn::fit(&cols, &targets, p)),
        Algorithm::LinearClassifier(p) => {
            let Targets::Class { y, n_classes } = &targets else {
                return Err(Error::LinearRegression);
            };
            Model::Linear(linear::Linear::fit(&cols, y, *n_classes, p))
        }
    };
    Ok(Predictor {
        spec: spec.clone(),
        input_features,
        target,
        fills,
        model,
    })
}

/// Node counts of a decision tree before and after reduced-error pruning,
/// grown on the rows `fit` would grow it on.
pub fn tree_node_counts(params: &TreeParams, data: &Dataset, target: Target<'_>, seed: u64) -> Result<(usize, usize)> {
    LearnerSpec::new(Algorithm::DecisionTree(params.clone())).validate()?;
    let p = prepare(data, target)?;
    Ok(tree::node_counts(&p.cols, &p.targets, params, seed))
}

/// Applies `predictor` to `data`. Inputs are matched by name, so column
/// order and extra columns in `data` do not matter.
pub fn predict(predictor: &Predictor, data: &Dataset) -> Result<Predictions> {
    let mut raw_columns = Vec::with_capacity(predictor.input_features.len());
    for f in &predictor.input_features {
        let i = data
            .feature_index(&f.name)
            .ok_or_else(|| Error::UnknownFeature(f.name.clone()))?;
        if data.features()[i].kind != f.kind {
            return Err(Error::KindMismatch(f.name.clone()));
        }
        raw_columns.push(data.column(i).to_vec());
    }
    let cols = encode::encode(&predictor.input_features, &raw_columns, &predictor.fills);
    let n = data.n_rows();
    let raw = match &predictor.model {
        Model::Tree(t) => t.predict(&cols, n),
        Model::Forest(f) => f.predict(&cols, n),
        Model::Knn(k) => k.predict(&cols, n),
        Model::Linear(l) => l.predict(&cols, n),
    };
    let binary = predictor.is_binary_classifier();
    Ok(match raw {
        RawOutput::Reg(ys) => Predictions {
            values: ys.into_iter().map(Value::Num).collect(),
            positive_scores: None,
        },
        RawOutput::Class(dists) => {
            let values = dists.iter().map(|d| Value::Cat(argmax(d))).collect();
            let positive_scores = binary.then(|| dists.iter().map(|d| d[1]).collect());
            Predictions {
                values,
                positive_scores,
            }
        }
        RawOutput::Voted { classes, positive } => Predictions {
            values: classes.into_iter().map(Value::Cat).collect(),
            positive_scores: binary.then_some(positive),
        },
    })
}

/// Index of the largest entry; ties go to the lowest index.
pub(crate) fn argmax(xs: &[f64]) -> u32 {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate() {
        if x > xs[best] {
            best = i;
        }
    }
    best as u32
}

/// Accuracy of `predicted` against `truth`, ignoring rows with a missing truth.
pub fn accuracy(predicted: &[Value], truth: &[Value]) -> f64 {
    let mut seen = 0usize;
    let mut hit = 0usize;
    for (p, t) in predicted.iter().zip(truth) {
        if t.is_missing() {
            continue;
        }
        seen += 1;
        if p == t {
            hit += 1;
        }
    }
    if seen == 0 {
        0.0
    } else {
        hit as f64 / seen as f64
    }
}
