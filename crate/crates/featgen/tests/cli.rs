mod common;

use std::path::Path;

use featgen::commands::{read_predictors, FeatureManifest, ReportFile, MISSING};
use featgen::dataset_io::{load, parse_dataset, serialize_dataset, Schema};
use featgen_core::generation::enhance;
use featgen_core::{Dataset, Feature, Label, Value};
use proptest::prelude::*;

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn generate_writes_features_and_predictors_that_replay() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = common::xor_workspace(tmp.path(), 1);
    let out = tmp.path().join("out");
    common::featgen(&["generate", "--config", s(&cfg), "--out-dir", s(&out)]);

    let manifest: FeatureManifest = serde_json::from_str(&std::fs::read_to_string(out.join("features.json")).unwrap()).unwrap();
    assert!(manifest.accepted.iter().any(|f| f.source_target == "h"), "{manifest:?}");
    assert_eq!(manifest.auxiliaries, vec![("aux".to_string(), 4, 1)]);

    let predictors = read_predictors(&out.join("predictors.json")).unwrap();
    let names: Vec<&str> = predictors.features.iter().map(|f| f.name.as_str()).collect();
    let accepted: Vec<&str> = manifest.accepted.iter().map(|f| f.name.as_str()).collect();
    assert_eq!(names, accepted);

    let train = load(&tmp.path().join("train.csv")).unwrap().normalize();
    let enhanced = load(&out.join("enhanced.csv")).unwrap();
    assert_eq!(enhance(&train, &predictors.features).unwrap(), enhanced);

    let run: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(run["command"], "generate");
    let outputs: Vec<&str> = run["outputs"].as_array().unwrap().iter().map(|o| o["path"].as_str().unwrap()).collect();
    assert_eq!(
        outputs,
        ["config.toml", "enhanced.csv", "enhanced.schema.toml", "features.json", "predictors.json"]
    );
}

#[test]
fn generate_without_auxiliaries_returns_the_input() {
    let tmp = tempfile::tempdir().unwrap();
    let (train, _) = common::xor_fgt(60, 1, 2, 0.0, 4);
    common::write_dataset(tmp.path(), "train", &train);
    let cfg = tmp.path().join("run.toml");
    std::fs::write(&cfg, "seed = 0\n\n[train]\ndata = \"train.csv\"\nnormalize = false\n").unwrap();
    let out = tmp.path().join("out");
    common::featgen(&["generate", "--config", s(&cfg), "--out-dir", s(&out)]);
    assert_eq!(load(&out.join("enhanced.csv")).unwrap(), train);
    assert!(read_predictors(&out.join("predictors.json")).unwrap().features.is_empty());
}

#[test]
fn evaluate_report_replays_from_its_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = common::xor_workspace(tmp.path(), 2);
    let first = tmp.path().join("first");
    let second = tmp.path().join("second");
    common::featgen(&["evaluate", "--config", s(&cfg), "--out-dir", s(&first)]);
    let echoed = first.join("config.toml");
    common::featgen(&["evaluate", "--config", s(&echoed), "--out-dir", s(&second)]);
    for name in ["report.json", "report.txt", "curves.csv"] {
        assert_eq!(std::fs::read(first.join(name)).unwrap(), std::fs::read(second.join(name)).unwrap(), "{name}");
    }
    let report: ReportFile = serde_json::from_slice(&std::fs::read(first.join("report.json")).unwrap()).unwrap();
    assert_eq!(report.report.folds.len(), 5);
    assert!(report.report.learners[0].delta > 0.0);
    let table = std::fs::read_to_string(first.join("report.txt")).unwrap();
    assert!(table.contains("DT"), "{table}");
}

#[test]
fn seed_flag_overrides_the_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = common::xor_workspace(tmp.path(), 2);
    let out = tmp.path().join("out");
    common::featgen(&["generate", "--config", s(&cfg), "--seed", "17", "--out-dir", s(&out)]);
    let run: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(run["seed"], 17);
    assert!(std::fs::read_to_string(out.join("config.toml")).unwrap().starts_with("seed = 17"));
}

#[test]
fn full_alpha_without_auxiliaries_has_zero_delta() {
    let tmp = tempfile::tempdir().unwrap();
    let (train, _) = common::xor_fgt(80, 1, 2, 0.05, 6);
    common::write_dataset(tmp.path(), "train", &train);
    let cfg = tmp.path().join("run.toml");
    std::fs::write(
        &cfg,
        "seed = 3\n\n[train]\ndata = \"train.csv\"\n\n[protocol]\nfolds = 5\nalpha = 1.0\n\n[[protocol.learners]]\nalgorithm = \"decision_tree\"\n",
    )
    .unwrap();
    let out = tmp.path().join("out");
    common::featgen(&["evaluate", "--config", s(&cfg), "--out-dir", s(&out)]);
    let report: ReportFile = serde_json::from_slice(&std::fs::read(out.join("report.json")).unwrap()).unwrap();
    let l = &report.report.learners[0];
    assert_eq!((l.delta, l.p, l.significant), (0.0, 1.0, false));
}

#[test]
fn match_prints_summaries_and_writes_matchings() {
    let tmp = tempfile::tempdir().unwrap();
    common::xor_workspace(tmp.path(), 0);
    let out = tmp.path().join("m");
    let output = common::featgen(&[
        "match",
        "--train",
        s(&tmp.path().join("train.csv")),
        "--aux",
        s(&tmp.path().join("aux.csv")),
        "--out-dir",
        s(&out),
    ]);
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert_eq!(stdout.trim(), "aux: 4 matched, 1 aux-only");
    let tsv = std::fs::read_to_string(out.join("matching_aux.tsv")).unwrap();
    assert!(tsv.lines().any(|l| l == "-\th"), "{tsv}");
    assert!(out.join("manifest.json").is_file());
}

#[test]
fn split_writes_both_halves() {
    let tmp = tempfile::tempdir().unwrap();
    let (whole, _) = common::xor_fgt(30, 1, 7, 0.0, 8);
    let input = common::write_dataset(tmp.path(), "whole", &whole);
    let out = tmp.path().join("split");
    common::featgen(&["split", "--input", s(&input), "--seed", "5", "--out-dir", s(&out)]);
    let t = load(&out.join("train.csv")).unwrap();
    let a = load(&out.join("aux.csv")).unwrap();
    assert_eq!((t.n_rows(), a.n_rows()), (15, 15));
    // 9 features: 3 shared, 4 of the remaining 6 train-only, 2 aux-only.
    assert_eq!((t.n_features(), a.n_features()), (7, 5));
}

#[test]
fn bad_inputs_are_reported_together() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.toml");
    std::fs::write(
        &cfg,
        "seed = 0\n\n[train]\ndata = \"nope.csv\"\n\n[[aux]]\nname = \"a\"\ndata = \"gone.csv\"\nstrategy = \"manual\"\n",
    )
    .unwrap();
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_featgen"))
        .args(["generate", "--config", s(&cfg), "--out-dir", s(&tmp.path().join("o"))])
        .output()
        .unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    for needle in ["nope.csv", "gone.csv", "table"] {
        assert!(err.contains(needle), "missing `{needle}` in {err}");
    }
    assert!(!tmp.path().join("o").exists());
}

fn arb_dataset() -> impl Strategy<Value = Dataset> {
    (1usize..6, 1usize..20).prop_flat_map(|(n_features, n_rows)| {
        let cell = prop_oneof![
            1 => Just(None),
            6 => (-1e6f64..1e6).prop_map(Some),
        ];
        let cats = prop::collection::vec(prop::option::weighted(0.9, 0u32..3), n_rows);
        (
            prop::collection::vec(prop::collection::vec(cell, n_rows), n_features),
            prop::collection::vec(any::<bool>(), n_features),
            cats,
        )
            .prop_map(move |(cols, nominal, labels)| {
                let mut features = Vec::new();
                let mut values = Vec::new();
                for (i, (col, nom)) in cols.into_iter().zip(nominal).enumerate() {
                    if nom {
                        features.push(Feature::nominal(format!("c {i}"), ["x", "y,z", "\"q\""]));
                        values.push(
                            col.into_iter()
                                .map(|c| c.map_or(Value::Missing, |x| Value::Cat((x.abs() as u32) % 3)))
                                .collect(),
                        );
                    } else {
                        features.push(Feature::continuous(format!("n{i}")).with_description("a value"));
                        values.push(col.into_iter().map(|c| c.map_or(Value::Missing, Value::Num)).collect());
                    }
                }
                let label = Label {
                    feature: Feature::nominal("class", ["a", "b", "c"]),
                    values: labels.into_iter().map(|c| c.map_or(Value::Missing, Value::Cat)).collect(),
                };
                Dataset::new(features, values, n_rows, Some(label)).unwrap()
            })
    })
}

proptest! {
    #[test]
    fn csv_round_trip(d in arb_dataset()) {
        let (csv, schema) = serialize_dataset(&d, MISSING).unwrap();
        let schema = Schema::parse(&schema).unwrap();
        let back = parse_dataset(&csv, &schema).unwrap();
        prop_assert_eq!(&back, &d);
        prop_assert_eq!(serialize_dataset(&back, MISSING).unwrap().0, csv);
    }
}
