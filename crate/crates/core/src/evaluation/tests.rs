use alloc::vec;
use alloc::vec::Vec;

use super::*;
use crate::generation::tests::planted;
use crate::learners::{Algorithm, ForestParams};
use crate::tabular::{Feature, Label, Value};

fn wide(n_rows: usize, n_features: usize) -> Dataset {
    let features: Vec<Feature> = (0..n_features).map(|i| Feature::continuous(alloc::format!("f{i}"))).collect();
    let cols = (0..n_features)
        .map(|j| (0..n_rows).map(|r| Value::Num((r * 31 + j * 7) as f64 % 13.0)).collect())
        .collect();
    let label = Label {
        feature: Feature::nominal("y", ["n", "p"]),
        values: (0..n_rows).map(|r| Value::Cat((r % 2) as u32)).collect(),
    };
    Dataset::new(features, cols, n_rows, Some(label)).unwrap()
}

#[test]
fn split_counts_follow_rounding() {
    let d = wide(11, 12);
    let s = split_fgt(&d, &FgtSplitSpec::default()).unwrap();
    assert_eq!(s.shared.len(), 4);
    assert_eq!(s.train.n_features(), 9);
    assert_eq!(s.aux.n_features(), 7);
    assert_eq!(s.train.n_rows(), 5);
    assert_eq!(s.aux.n_rows(), 6);
    assert!(s.train.is_labeled() && s.aux.is_labeled());
}

#[test]
fn split_is_a_partition() {
    let d = wide(40, 10);
    for seed in 0..20 {
        let s = split_fgt(&d, &FgtSplitSpec { seed, ..Default::default() }).unwrap();
        let mut all: Vec<usize> = s.train_rows.iter().chain(&s.aux_rows).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..40).collect::<Vec<_>>());
        let t: BTreeSet<&str> = s.train.feature_names().collect();
        let a: BTreeSet<&str> = s.aux.feature_names().collect();
        let both: Vec<&str> = t.intersection(&a).copied().collect();
        let shared: Vec<&str> = s.shared.iter().map(String::as_str).collect();
        assert_eq!(both, shared);
        assert_eq!(t.union(&a).count(), 10);
        // Rows keep their values.
        let r = s.aux_rows[3];
        let name = s.aux.features()[0].name.as_str();
        assert_eq!(s.aux.column_by_name(name).unwrap()[3], d.column_by_name(name).unwrap()[r]);
    }
    let spec = FgtSplitSpec { seed: 9, ..Default::default() };
    assert_eq!(split_fgt(&d, &spec).unwrap(), split_fgt(&d, &spec).unwrap());
}

#[test]
fn split_errors() {
    assert!(split_fgt(&wide(3, 10), &FgtSplitSpec::default()).is_err());
    assert!(split_fgt(&wide(10, 2), &FgtSplitSpec::default()).is_err());
    // 3 features: one shared, then 2 left and round(2/3 * 2) = 1 each side.
    assert!(split_fgt(&wide(10, 3), &FgtSplitSpec::default()).is_ok());
    let bad = FgtSplitSpec { mu1: 1.0, ..Default::default() };
    assert!(split_fgt(&wide(10, 10), &bad).is_err());
    let unlabeled = wide(10, 10).with_label(None).unwrap();
    assert_eq!(split_fgt(&unlabeled, &FgtSplitSpec::default()), Err(Error::Unlabeled));
}

#[test]
fn folds_partition_the_rows() {
    let d = wide(57, 3);
    let cfg = ProtocolConfig { seed: 4, ..Default::default() };
    let plans = plan_folds(&d, &cfg).unwrap();
    assert_eq!(plans.len(), 10);
    let mut seen = vec![0; 57];
    for p in &plans {
        for &r in &p.test_rows {
            seen[r] += 1;
        }
        assert!(p.reduced_rows.iter().all(|r| !p.test_rows.contains(r)));
        // 25% of about 26 rows per class, rounded per class.
        assert!((12..=14).contains(&p.reduced_rows.len()), "{}", p.reduced_rows.len());
    }
    assert!(seen.iter().all(|&c| c == 1));
}

#[test]
fn small_class_fails_stratification() {
    let mut d = wide(30, 3);
    let mut y: Vec<Value> = vec![Value::Cat(0); 30];
    for v in y.iter_mut().take(4) {
        *v = Value::Cat(1);
    }
    d = d
        .with_label(Some(Label {
            feature: Feature::nominal("y", ["n", "p"]),
            values: y,
        }))
        .unwrap();
    let err = plan_folds(&d, &ProtocolConfig::default()).unwrap_err();
    assert_eq!(
        err,
        Error::Stratification {
            class: "p".into(),
            count: 4,
            folds: 10
        }
    );
}

#[test]
fn no_auxiliaries_and_full_alpha_change_nothing() {
    let (train, _) = planted(80, 10, 2, 1);
    let cfg = ProtocolConfig {
        alpha: 1.0,
        folds: 5,
        ..Default::default()
    };
    let report = run_protocol(&train, &[], &cfg).unwrap();
    let l = &report.learners[0];
    assert_eq!(l.delta, 0.0);
    assert_eq!(l.p, 1.0);
    assert!(!l.significant);
    assert!(report.folds.iter().all(|f| f.baseline == f.enhanced && f.accepted.is_empty()));
    let plans = plan_folds(&train, &cfg).unwrap();
    assert!(plans.iter().all(|p| p.reduced_rows.len() + p.test_rows.len() == 80));
}

#[test]
fn baseline_is_reproducible_directly() {
    let (train, aux) = planted(120, 150, 2, 3);
    let cfg = ProtocolConfig {
        folds: 4,
        alpha: 0.5,
        primary_specs: vec![LearnerSpec::decision_tree(), LearnerSpec::knn(3)],
        generation: GenerationConfig {
            secondary_spec: LearnerSpec::new(Algorithm::RandomForest(ForestParams {
                trees: 10,
                ..Default::default()
            })),
            ..Default::default()
        },
        seed: 11,
        ..Default::default()
    };
    let auxes = [ProtocolAux {
        name: "aux".into(),
        data: aux,
        strategy: MatchStrategy::ExactName,
    }];
    let report = run_protocol(&train, &auxes, &cfg).unwrap();
    assert_eq!(report.folds.len(), 8);
    let plans = plan_folds(&train, &cfg).unwrap();
    for (i, f) in report.folds.iter().enumerate() {
        let spec = &cfg.primary_specs[i % 2];
        assert_eq!(f.learner, spec.short_name());
        let plan = &plans[i / 2];
        let fit_on = train.select_rows(&plan.reduced_rows);
        let test = train.select_rows(&plan.test_rows);
        let p = learners::fit(spec, &fit_on, Target::Label).unwrap();
        let acc = accuracy(&learners::predict(&p, &test).unwrap().values, &test.label().unwrap().values);
        assert_eq!(f.baseline, acc);
        assert!((0.0..=1.0).contains(&f.enhanced));
        assert!(f.accepted.iter().all(|a| a.utility > 0.0));
        assert_eq!(f.curve[0].features, 0);
        assert_eq!(f.curve.last().unwrap().features, f.accepted.len());
        assert_eq!(f.shared_counts, vec![4]);
        assert_eq!(f.aux_only_counts, vec![2]);
    }
    assert_eq!(report.auxiliaries[0].avg_shared, 4.0);
    for l in &report.learners {
        assert!((0.0..=1.0).contains(&l.p));
        assert_eq!(l.significant, l.p < 0.05 && l.delta > 0.0);
    }
    assert_eq!(report, run_protocol(&train, &auxes, &cfg).unwrap());
}

#[test]
fn planted_feature_lifts_accuracy() {
    let (train, aux) = planted(200, 300, 2, 5);
    let cfg = ProtocolConfig {
        folds: 5,
        generation: GenerationConfig {
            secondary_spec: LearnerSpec::new(Algorithm::RandomForest(ForestParams {
                trees: 15,
                ..Default::default()
            })),
            ..Default::default()
        },
        ..Default::default()
    };
    let auxes = [ProtocolAux {
        name: "aux".into(),
        data: aux,
        strategy: MatchStrategy::ExactName,
    }];
    let report = run_protocol(&train, &auxes, &cfg).unwrap();
    let l = &report.learners[0];
    assert!(l.delta > 0.1, "{l:?}");
    assert!(report.folds.iter().any(|f| f.accepted.iter().any(|a| a.source_target == "h")));
}

#[test]
fn accuracy_at_uses_the_last_point_not_beyond() {
    let f = FoldResult {
        fold: 0,
        learner: "DT".into(),
        baseline: 0.5,
        enhanced: 0.9,
        train_rows: 1,
        test_rows: 1,
        accepted: Vec::new(),
        curve: vec![
            CurvePoint { features: 0, accuracy: 0.5 },
            CurvePoint { features: 5, accuracy: 0.7 },
            CurvePoint { features: 7, accuracy: 0.9 },
        ],
        shared_counts: Vec::new(),
        aux_only_counts: Vec::new(),
    };
    assert_eq!(f.accuracy_at(0), 0.5);
    assert_eq!(f.accuracy_at(6), 0.7);
    assert_eq!(f.accuracy_at(10), 0.9);
}

#[test]
fn config_validation() {
    assert!(ProtocolConfig::default().validate().is_ok());
    let bad = [
        ProtocolConfig { folds: 1, ..Default::default() },
        ProtocolConfig { alpha: 0.0, ..Default::default() },
        ProtocolConfig { alpha: 1.5, ..Default::default() },
        ProtocolConfig { primary_specs: Vec::new(), ..Default::default() },
        ProtocolConfig { top_k_cap: Some(0), ..Default::default() },
    ];
    for c in bad {
        assert!(c.validate().is_err());
    }
}
