//! Run configuration files (TOML).
//!
//! ```toml
//! seed = 7
//!
//! [train]
//! data = "pima.csv"            # schema defaults to pima.schema.toml
//!
//! [[aux]]
//! name = "breast_cancer"
//! data = "breast_cancer_coimbra.csv"
//! strategy = "manual"          # manual | exact | fuzzy | embedding | distribution
//! table = "pima_breast_cancer.tsv"
//!
//! [generation]
//! algorithm = "kbfg_star"
//! [generation.secondary]
//! algorithm = "random_forest"
//! trees = 50
//!
//! [protocol]
//! folds = 10
//! alpha = 0.25
//! [[protocol.learners]]
//! algorithm = "decision_tree"
//! ```
//!
//! Instead of `[[aux]]` entries a `[split]` table carves the training file
//! into a training half and an auxiliary half. Relative paths are resolved
//! against a base directory (the config file's directory by default).

use std::path::{Path, PathBuf};

use featgen_core::evaluation::{split_fgt, FgtSplitSpec, ProtocolAux, ProtocolConfig};
use featgen_core::generation::{DuplicatePolicy, GenerationConfig};
use featgen_core::learners::LearnerSpec;
use featgen_core::matching::{
    MatchStrategy, DEFAULT_DISTRIBUTION_DISTANCE, DEFAULT_FUZZY_DISTANCE, DEFAULT_MIN_COSINE,
};
use featgen_core::Dataset;
use serde::{Deserialize, Serialize};

use crate::dataset_io::{read_dataset, schema_path_for};
use crate::error::{Error, Result};
use crate::formats::{read_embeddings, read_manual_table};
use crate::output::{digest_file, FileDigest};

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetRef {
    pub data: PathBuf,
    /// Defaults to the data path with a `.schema.toml` extension.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<PathBuf>,
    /// Min-max rescale continuous features after loading.
    #[serde(default = "yes")]
    pub normalize: bool,
}

impl DatasetRef {
    pub fn schema_path(&self) -> PathBuf {
        self.schema.clone().unwrap_or_else(|| schema_path_for(&self.data))
    }

    /// File stem of the data path.
    pub fn stem(&self) -> String {
        self.data
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "train".into())
    }

    fn load(&self) -> Result<Dataset> {
        let d = read_dataset(&self.data, &self.schema_path())?;
        Ok(if self.normalize { d.normalize() } else { d })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    Manual,
    Exact,
    Fuzzy,
    Embedding,
    Distribution,
}

impl std::str::FromStr for StrategyKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "manual" => StrategyKind::Manual,
            "exact" => StrategyKind::Exact,
            "fuzzy" => StrategyKind::Fuzzy,
            "embedding" => StrategyKind::Embedding,
            "distribution" => StrategyKind::Distribution,
            _ => return Err(format!("unknown strategy `{s}`")),
        })
    }
}

/// How to pair auxiliary features with training features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategyConfig {
    pub strategy: StrategyKind,
    /// Manual table path.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<PathBuf>,
    /// Embedding vectors path.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embeddings: Option<PathBuf>,
    /// Maximum distance (fuzzy, distribution) or minimum cosine (embedding).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
}

impl StrategyConfig {
    pub fn exact() -> Self {
        StrategyConfig {
            strategy: StrategyKind::Exact,
            table: None,
            embeddings: None,
            threshold: None,
        }
    }

    fn check(&self, what: &str, errors: &mut Vec<String>) {
        let need = |field: &Option<PathBuf>, name: &str, errors: &mut Vec<String>| match field {
            None => errors.push(format!("{what}: strategy `{:?}` needs `{name}`", self.strategy)),
            Some(p) if !p.is_file() => errors.push(format!("{what}: {} does not exist", p.display())),
            Some(_) => {}
        };
        match self.strategy {
            StrategyKind::Manual => need(&self.table, "table", errors),
            StrategyKind::Embedding => need(&self.embeddings, "embeddings", errors),
            _ => {}
        }
        if let Some(t) = self.threshold {
            let ok = match self.strategy {
                StrategyKind::Embedding => (-1.0..=1.0).contains(&t),
                StrategyKind::Fuzzy | StrategyKind::Distribution => (0.0..=1.0).contains(&t),
                _ => true,
            };
            if !ok {
                errors.push(format!("{what}: threshold {t} is out of range"));
            }
        }
    }

    pub fn build(&self) -> Result<MatchStrategy> {
        let missing = |f: &str| Error::Config(vec![format!("strategy `{:?}` needs `{f}`", self.strategy)]);
        Ok(match self.strategy {
            StrategyKind::Manual => {
                MatchStrategy::ManualTable(read_manual_table(self.table.as_ref().ok_or_else(|| missing("table"))?)?)
            }
            StrategyKind::Exact => MatchStrategy::ExactName,
            StrategyKind::Fuzzy => MatchStrategy::FuzzyName {
                max_distance: self.threshold.unwrap_or(DEFAULT_FUZZY_DISTANCE),
            },
            StrategyKind::Embedding => MatchStrategy::Embedding {
                table: read_embeddings(self.embeddings.as_ref().ok_or_else(|| missing("embeddings"))?)?,
                min_cosine: self.threshold.unwrap_or(DEFAULT_MIN_COSINE),
            },
            StrategyKind::Distribution => MatchStrategy::Distribution {
                max_distance: self.threshold.unwrap_or(DEFAULT_DISTRIBUTION_DISTANCE),
            },
        })
    }

    fn files(&self) -> impl Iterator<Item = &PathBuf> {
        self.table.iter().chain(&self.embeddings)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuxConfig {
    pub name: String,
    pub data: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<PathBuf>,
    #[serde(default = "yes")]
    pub normalize: bool,
    pub strategy: StrategyKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embeddings: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
}

impl AuxConfig {
    pub fn dataset(&self) -> DatasetRef {
        DatasetRef {
            data: self.data.clone(),
            schema: self.schema.clone(),
            normalize: self.normalize,
        }
    }

    pub fn strategy(&self) -> StrategyConfig {
        StrategyConfig {
            strategy: self.strategy,
            table: self.table.clone(),
            embeddings: self.embeddings.clone(),
            threshold: self.threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitConfig {
    #[serde(default = "third")]
    pub mu1: f64,
    #[serde(default = "two_thirds")]
    pub mu2: f64,
    /// Defaults to the run seed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

fn third() -> f64 {
    1.0 / 3.0
}

fn two_thirds() -> f64 {
    2.0 / 3.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    /// One auxiliary dataset.
    Kbfg,
    /// Any number of auxiliaries, pooled and re-ranked.
    #[default]
    KbfgStar,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerationSection {
    pub algorithm: Algorithm,
    pub secondary: LearnerSpec,
    /// Wrapper judge for `generate`; `evaluate` uses each protocol learner.
    pub primary: LearnerSpec,
    pub wrapper_folds: usize,
    pub recurrent: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_targets: Option<usize>,
    /// Embedding vectors used to order targets.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prioritization: Option<PathBuf>,
    pub duplicate_policy: DuplicatePolicy,
    pub intersection_cap: usize,
    pub include_aux_label: bool,
}

impl Default for GenerationSection {
    fn default() -> Self {
        let g = GenerationConfig::default();
        GenerationSection {
            algorithm: Algorithm::default(),
            secondary: g.secondary_spec,
            primary: g.primary_spec,
            wrapper_folds: g.wrapper_folds,
            recurrent: g.recurrent,
            max_targets: g.max_targets,
            prioritization: None,
            duplicate_policy: g.duplicate_policy,
            intersection_cap: g.intersection_cap,
            include_aux_label: g.include_aux_label,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProtocolSection {
    pub folds: usize,
    pub alpha: f64,
    pub learners: Vec<LearnerSpec>,
    /// 0 disables the cap.
    pub top_k_cap: usize,
    pub curve_step: usize,
}

impl Default for ProtocolSection {
    fn default() -> Self {
        let p = ProtocolConfig::default();
        ProtocolSection {
            folds: p.folds,
            alpha: p.alpha,
            learners: p.primary_specs,
            top_k_cap: p.top_k_cap.unwrap_or(0),
            curve_step: p.curve_step,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    pub train: DatasetRef,
    #[serde(default, rename = "aux", skip_serializing_if = "Vec::is_empty")]
    pub auxiliaries: Vec<AuxConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<SplitConfig>,
    #[serde(default)]
    pub generation: GenerationSection,
    #[serde(default)]
    pub protocol: ProtocolSection,
}

/// Datasets and core configurations built from a [`RunConfig`].
#[derive(Debug, Clone)]
pub struct Loaded {
    pub train_name: String,
    pub train: Dataset,
    pub auxiliaries: Vec<ProtocolAux>,
    pub generation: GenerationConfig,
    pub protocol: ProtocolConfig,
    pub inputs: Vec<FileDigest>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<RunConfig> {
        toml::from_str(text).map_err(|e| Error::Toml(e.to_string()))
    }

    /// Reads `path` and resolves relative paths against its directory.
    pub fn read(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(Error::io(path))?;
        let cfg = RunConfig::parse(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let base = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
        Ok(cfg.resolved(&absolute(base)))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Toml(e.to_string()))
    }

    /// Copy with every relative path joined onto `base`.
    pub fn resolved(mut self, base: &Path) -> RunConfig {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.train.data);
        self.train.schema.as_mut().map(fix);
        for a in &mut self.auxiliaries {
            fix(&mut a.data);
            a.schema.as_mut().map(fix);
            a.table.as_mut().map(fix);
            a.embeddings.as_mut().map(fix);
        }
        self.generation.prioritization.as_mut().map(fix);
        self
    }

    fn split_spec(&self) -> Option<FgtSplitSpec> {
        self.split.as_ref().map(|s| FgtSplitSpec {
            mu1: s.mu1,
            mu2: s.mu2,
            seed: s.seed.unwrap_or(self.seed),
        })
    }

    pub fn generation_config(&self) -> Result<GenerationConfig> {
        let g = &self.generation;
        Ok(GenerationConfig {
            secondary_spec: g.secondary.clone(),
            primary_spec: g.primary.clone(),
            wrapper_folds: g.wrapper_folds,
            recurrent: g.recurrent,
            max_targets: g.max_targets,
            prioritization: g.prioritization.as_deref().map(read_embeddings).transpose()?,
            duplicate_policy: g.duplicate_policy,
            intersection_cap: g.intersection_cap,
            include_aux_label: g.include_aux_label,
            seed: self.seed,
        })
    }

    fn protocol_config(&self, generation: GenerationConfig) -> ProtocolConfig {
        let p = &self.protocol;
        ProtocolConfig {
            folds: p.folds,
            alpha: p.alpha,
            primary_specs: p.learners.clone(),
            generation,
            top_k_cap: (p.top_k_cap > 0).then_some(p.top_k_cap),
            curve_step: p.curve_step,
            seed: self.seed,
        }
    }

    /// Every problem found without loading data, so that all of them can be
    /// reported at once.
    pub fn problems(&self) -> Vec<String> {
        let mut errors = Vec::new();
        let mut file = |p: &Path, what: &str| {
            if !p.is_file() {
                errors.push(format!("{what}: {} does not exist", p.display()));
            }
        };
        file(&self.train.data, "train data");
        file(&self.train.schema_path(), "train schema");
        for a in &self.auxiliaries {
            let what = format!("aux `{}`", a.name);
            file(&a.data, &what);
            file(&a.dataset().schema_path(), &what);
        }
        if let Some(p) = &self.generation.prioritization {
            file(p, "prioritization");
        }
        let mut names = std::collections::BTreeSet::new();
        for a in &self.auxiliaries {
            if a.name.is_empty() {
                errors.push("aux names must not be empty".into());
            } else if !names.insert(a.name.as_str()) {
                errors.push(format!("aux name `{}` is used twice", a.name));
            }
            a.strategy().check(&format!("aux `{}`", a.name), &mut errors);
        }
        if self.split.is_some() && !self.auxiliaries.is_empty() {
            errors.push("`split` and `aux` entries are mutually exclusive".into());
        }
        if let Some(s) = self.split_spec() {
            if let Err(e) = s.validate() {
                errors.push(format!("split: {e}"));
            }
        }
        if self.generation.algorithm == Algorithm::Kbfg && self.auxiliaries.len() > 1 {
            errors.push("generation.algorithm = \"kbfg\" takes one auxiliary dataset".into());
        }
        for (what, spec) in [("generation.secondary", &self.generation.secondary), ("generation.primary", &self.generation.primary)] {
            if let Err(e) = spec.validate() {
                errors.push(format!("{what}: {e}"));
            }
        }
        for (i, spec) in self.protocol.learners.iter().enumerate() {
            if let Err(e) = spec.validate() {
                errors.push(format!("protocol.learners[{i}]: {e}"));
            }
        }
        let g = &self.generation;
        if g.wrapper_folds < 2 {
            errors.push("generation.wrapper_folds must be at least 2".into());
        }
        if g.max_targets == Some(0) {
            errors.push("generation.max_targets must be at least 1".into());
        }
        if g.intersection_cap == 0 {
            errors.push("generation.intersection_cap must be at least 1".into());
        }
        let p = &self.protocol;
        if p.folds < 2 {
            errors.push("protocol.folds must be at least 2".into());
        }
        if !(p.alpha > 0.0 && p.alpha <= 1.0) {
            errors.push("protocol.alpha must be in (0, 1]".into());
        }
        if p.learners.is_empty() {
            errors.push("protocol.learners must not be empty".into());
        }
        if p.curve_step == 0 {
            errors.push("protocol.curve_step must be at least 1".into());
        }
        errors
    }

    /// Validates, then loads the datasets and builds the core configurations.
    pub fn load(&self) -> Result<Loaded> {
        let problems = self.problems();
        if !problems.is_empty() {
            return Err(Error::Config(problems));
        }
        let mut inputs = vec![digest_file(&self.train.data)?, digest_file(&self.train.schema_path())?];
        let full = self.train.load()?;
        let train_name = self.train.stem();
        let (train, auxiliaries) = match self.split_spec() {
            Some(spec) => {
                let s = split_fgt(&full, &spec)?;
                let aux = ProtocolAux {
                    name: format!("{train_name}_aux"),
                    data: s.aux,
                    strategy: MatchStrategy::ExactName,
                };
                (s.train, vec![aux])
            }
            None => {
                let mut auxes = Vec::new();
                for a in &self.auxiliaries {
                    let d = a.dataset();
                    inputs.push(digest_file(&d.data)?);
                    inputs.push(digest_file(&d.schema_path())?);
                    for f in a.strategy().files() {
                        inputs.push(digest_file(f)?);
                    }
                    auxes.push(ProtocolAux {
                        name: a.name.clone(),
                        data: d.load()?,
                        strategy: a.strategy().build()?,
                    });
                }
                (full, auxes)
            }
        };
        if let Some(p) = &self.generation.prioritization {
            inputs.push(digest_file(p)?);
        }
        let generation = self.generation_config()?;
        let protocol = self.protocol_config(generation.clone());
        protocol.validate()?;
        Ok(Loaded {
            train_name,
            train,
            auxiliaries,
            generation,
            protocol,
            inputs,
        })
    }
}

pub(crate) fn absolute(p: &Path) -> PathBuf {
    std::path::absolute(p).unwrap_or_else(|_| p.to_path_buf())
}
