//! The work behind each subcommand. Every command writes its outputs with
//! [`OutputDir`] and finishes with a run manifest.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use featgen_core::evaluation::{run_protocol_with, split_fgt, ExperimentReport, FgtSplitSpec};
use featgen_core::generation::{
    enhance, resolve_duplicates, Auxiliary, CandidateRecord, Engine, GeneratedFeature,
};
use featgen_core::matching::{match_features, FeatureMatching};
use featgen_core::Dataset;
use serde::{Deserialize, Serialize};

use crate::config::{absolute, Algorithm, DatasetRef, Loaded, RunConfig, StrategyConfig};
use crate::dataset_io::{load, read_dataset, schema_path_for, serialize_dataset};
use crate::error::{Error, Result};
use crate::formats::format_matching;
use crate::output::{digest_file, OutputDir, RunManifest};
use crate::threads::Threads;

pub const PREDICTOR_FORMAT: &str = "featgen-predictors";
pub const PREDICTOR_VERSION: u32 = 1;

/// Missing-value token in every dataset this tool writes.
pub const MISSING: &str = "?";

#[derive(Debug, Clone, PartialEq)]
pub struct MatchSummary {
    pub aux: String,
    pub matching: FeatureMatching,
}

impl MatchSummary {
    pub fn line(&self) -> String {
        format!(
            "{}: {} matched, {} aux-only",
            self.aux,
            self.matching.pairs.len(),
            self.matching.unmatched_aux.len()
        )
    }
}

fn stem(p: &Path) -> String {
    p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Matches `train` against each auxiliary file. Matchings are written to
/// `matching_<aux>.tsv` when `out_dir` is given.
pub fn cmd_match(
    train_path: &Path,
    aux_paths: &[PathBuf],
    strategy: &StrategyConfig,
    out_dir: Option<&Path>,
) -> Result<Vec<MatchSummary>> {
    let mut problems = Vec::new();
    for p in std::iter::once(train_path).chain(aux_paths.iter().map(PathBuf::as_path)) {
        for f in [p.to_path_buf(), schema_path_for(p)] {
            if !f.is_file() {
                problems.push(format!("{} does not exist", f.display()));
            }
        }
    }
    if !problems.is_empty() {
        return Err(Error::Config(problems));
    }
    let train = load(train_path)?;
    let built = strategy.build()?;
    let mut inputs = vec![digest_file(train_path)?, digest_file(&schema_path_for(train_path))?];
    let mut out = match out_dir {
        Some(d) => Some(OutputDir::create(d)?),
        None => None,
    };
    let mut summaries = Vec::new();
    for p in aux_paths {
        let aux = load(p)?;
        inputs.push(digest_file(p)?);
        inputs.push(digest_file(&schema_path_for(p))?);
        let matching = match_features(&train, &aux, &built)?;
        let name = stem(p);
        if matching.pairs.is_empty() {
            log::warn!("`{name}` shares no features with `{}`", train_path.display());
        }
        if let Some(o) = out.as_mut() {
            o.write(&format!("matching_{name}.tsv"), format_matching(&matching))?;
        }
        summaries.push(MatchSummary { aux: name, matching });
    }
    for f in [&strategy.table, &strategy.embeddings].into_iter().flatten() {
        inputs.push(digest_file(f)?);
    }
    if let Some(o) = out {
        let config = serde_json::json!({
            "train": train_path,
            "aux": aux_paths,
            "strategy": strategy,
        });
        o.finish("match", 0, config, inputs)?;
    }
    Ok(summaries)
}

/// One line of the generated-feature manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureEntry {
    pub name: String,
    pub source_dataset: String,
    pub source_target: String,
    pub inputs: Vec<String>,
    pub utility: f64,
    pub information_gain: f64,
}

impl FeatureEntry {
    fn of(f: &GeneratedFeature) -> Self {
        FeatureEntry {
            name: f.name.clone(),
            source_dataset: f.source_dataset(),
            source_target: f.source_target.clone(),
            inputs: f.input_names().into_iter().map(str::to_string).collect(),
            utility: f.utility_at_acceptance,
            information_gain: f.information_gain,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureManifest {
    pub accepted: Vec<FeatureEntry>,
    /// Every secondary target considered, with its wrapper outcome.
    pub candidates: Vec<CandidateRecord>,
    /// Per auxiliary: (name, shared features, aux-only features).
    pub auxiliaries: Vec<(String, usize, usize)>,
}

/// Versioned container for fitted generated features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictorFile {
    pub format: String,
    pub version: u32,
    pub features: Vec<GeneratedFeature>,
}

pub fn read_predictors(path: &Path) -> Result<PredictorFile> {
    let text = std::fs::read_to_string(path).map_err(Error::io(path))?;
    let file: PredictorFile = serde_json::from_str(&text)?;
    if file.format != PREDICTOR_FORMAT || file.version != PREDICTOR_VERSION {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            message: format!("unsupported predictor file {} v{}", file.format, file.version),
        });
    }
    Ok(file)
}

#[derive(Debug, Clone)]
pub struct GenerateOutcome {
    pub enhanced: Dataset,
    pub features: Vec<GeneratedFeature>,
    pub manifest: RunManifest,
}

fn json_line<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Generates features for the configured training set and writes the
/// enhanced dataset, the feature manifest and the fitted predictors.
pub fn cmd_generate(cfg: &RunConfig, jobs: usize, out_dir: &Path) -> Result<GenerateOutcome> {
    let loaded = cfg.load()?;
    let Loaded {
        train,
        auxiliaries,
        generation,
        inputs,
        ..
    } = loaded;
    let engine = Engine::new(Threads::new(jobs));
    let matchings = auxiliaries
        .iter()
        .map(|a| match_features(&train, &a.data, &a.strategy))
        .collect::<featgen_core::Result<Vec<_>>>()?;
    let views: Vec<Auxiliary<'_>> = auxiliaries
        .iter()
        .zip(&matchings)
        .map(|(a, m)| Auxiliary {
            name: &a.name,
            data: &a.data,
            matching: m,
        })
        .collect();
    let mut manifest = FeatureManifest {
        accepted: Vec::new(),
        candidates: Vec::new(),
        auxiliaries: Vec::new(),
    };
    let features = match (cfg.generation.algorithm, views.as_slice()) {
        (_, []) => Vec::new(),
        (Algorithm::Kbfg, [one]) => {
            let run = engine.kbfg_run(&train, one, &generation, &BTreeSet::new())?;
            manifest.auxiliaries.push((one.name.to_string(), run.n_shared, run.n_aux_only));
            manifest.candidates = run.candidates;
            run.accepted
        }
        _ => {
            let pooled = engine.pool(&train, &views, &generation)?;
            for (i, v) in views.iter().enumerate() {
                manifest
                    .auxiliaries
                    .push((v.name.to_string(), pooled.shared_counts[i], pooled.aux_only_counts[i]));
            }
            manifest.candidates = pooled.candidates;
            let resolved = resolve_duplicates(pooled.accepted, &train, &generation)?;
            engine.select(&train, resolved, None, &generation)?.accepted
        }
    };
    manifest.accepted = features.iter().map(FeatureEntry::of).collect();
    let enhanced = enhance(&train, &features)?;

    let mut out = OutputDir::create(out_dir)?;
    let (csv_text, schema_text) = serialize_dataset(&enhanced, MISSING)?;
    out.write("enhanced.csv", csv_text)?;
    out.write("enhanced.schema.toml", schema_text)?;
    out.write("features.json", json_line(&manifest)?)?;
    out.write(
        "predictors.json",
        json_line(&PredictorFile {
            format: PREDICTOR_FORMAT.into(),
            version: PREDICTOR_VERSION,
            features: features.clone(),
        })?,
    )?;
    out.write("config.toml", cfg.to_toml()?)?;
    let run = out.finish("generate", cfg.seed, serde_json::to_value(cfg)?, inputs)?;
    Ok(GenerateOutcome {
        enhanced,
        features,
        manifest: run,
    })
}

/// Machine-readable report: the configuration it came from, fixed choices
/// of the harness, and the results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub config: RunConfig,
    pub train_name: String,
    pub train_rows: usize,
    pub notes: Vec<String>,
    pub report: ExperimentReport,
}

const REPORT_NOTES: [&str; 3] = [
    "each dataset is min-max normalized on its own when `normalize` is set",
    "the wrapper test inside generation uses the primary learner being evaluated",
    "information gain for ranking is computed on the reduced training part of each fold",
];

#[derive(Debug, Clone)]
pub struct EvaluateOutcome {
    pub report: ReportFile,
    pub table: String,
    pub manifest: RunManifest,
}

pub fn curves_csv(report: &ExperimentReport) -> String {
    let mut s = String::from("fold,learner,features,accuracy\n");
    for f in &report.folds {
        for p in &f.curve {
            let _ = writeln!(s, "{},{},{},{}", f.fold, f.learner, p.features, p.accuracy);
        }
    }
    s
}

/// Runs the testing protocol and writes `report.json`, `report.txt`,
/// `curves.csv` and the resolved `config.toml`.
pub fn cmd_evaluate(cfg: &RunConfig, jobs: usize, out_dir: &Path) -> Result<EvaluateOutcome> {
    let loaded = cfg.load()?;
    let report = run_protocol_with(&Threads::new(jobs), &loaded.train, &loaded.auxiliaries, &loaded.protocol)?;
    let table = report.table(&loaded.train_name, loaded.protocol.alpha);
    let file = ReportFile {
        config: cfg.clone(),
        train_name: loaded.train_name.clone(),
        train_rows: loaded.train.n_rows(),
        notes: REPORT_NOTES.iter().map(|s| s.to_string()).collect(),
        report,
    };
    let mut out = OutputDir::create(out_dir)?;
    out.write("report.json", json_line(&file)?)?;
    out.write("report.txt", &table)?;
    out.write("curves.csv", curves_csv(&file.report))?;
    out.write("config.toml", cfg.to_toml()?)?;
    let manifest = out.finish("evaluate", cfg.seed, serde_json::to_value(cfg)?, loaded.inputs)?;
    Ok(EvaluateOutcome {
        report: file,
        table,
        manifest,
    })
}

#[derive(Debug, Clone)]
pub struct SplitOutcome {
    pub train: Dataset,
    pub aux: Dataset,
    pub shared: Vec<String>,
}

/// Splits one labeled dataset into `train.csv` and `aux.csv` (with schemas).
pub fn cmd_split(input: &DatasetRef, spec: &FgtSplitSpec, out_dir: &Path) -> Result<SplitOutcome> {
    spec.validate()?;
    let d = read_dataset(&input.data, &input.schema_path())?;
    let s = split_fgt(&d, spec)?;
    let mut out = OutputDir::create(out_dir)?;
    for (name, data) in [("train", &s.train), ("aux", &s.aux)] {
        let (csv_text, schema_text) = serialize_dataset(data, MISSING)?;
        out.write(&format!("{name}.csv"), csv_text)?;
        out.write(&format!("{name}.schema.toml"), schema_text)?;
    }
    let inputs = vec![digest_file(&input.data)?, digest_file(&input.schema_path())?];
    let config = serde_json::json!({
        "input": absolute(&input.data),
        "mu1": spec.mu1,
        "mu2": spec.mu2,
    });
    out.finish("split", spec.seed, config, inputs)?;
    Ok(SplitOutcome {
        train: s.train,
        aux: s.aux,
        shared: s.shared,
    })
}
