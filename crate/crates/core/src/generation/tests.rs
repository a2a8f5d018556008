use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng as _;

use super::*;
use crate::matching::{match_features, MatchStrategy};

fn bit(r: &mut rng::Rng) -> f64 {
    if r.random_bool(0.5) {
        1.0
    } else {
        0.0
    }
}

/// Train: a, b and continuous noise d0..d{n_noise}; label = a XOR b.
/// Aux: a, b, noise, and h = a XOR b (nominal) plus an unrelated z.
pub(crate) fn planted(n_train: usize, n_aux: usize, n_noise: usize, seed: u64) -> (Dataset, Dataset) {
    let mut r = rng::seeded(seed);
    let mut make = |n: usize, aux: bool| {
        let mut features = vec![Feature::continuous("a"), Feature::continuous("b")];
        for i in 0..n_noise {
            features.push(Feature::continuous(alloc::format!("d{i}")));
        }
        let mut cols: Vec<Vec<Value>> = vec![Vec::new(); features.len()];
        let mut hs = Vec::new();
        let mut zs = Vec::new();
        for _ in 0..n {
            let (a, b) = (bit(&mut r), bit(&mut r));
            cols[0].push(Value::Num(a));
            cols[1].push(Value::Num(b));
            for c in cols.iter_mut().skip(2) {
                c.push(Value::Num(r.random::<f64>()));
            }
            hs.push(Value::Cat((a != b) as u32));
            zs.push(Value::Num(r.random::<f64>()));
        }
        if aux {
            features.push(Feature::nominal("h", ["no", "yes"]));
            cols.push(hs);
            features.push(Feature::continuous("z"));
            cols.push(zs);
            Dataset::new(features, cols, n, None).unwrap()
        } else {
            Dataset::new(
                features,
                cols,
                n,
                Some(Label {
                    feature: Feature::nominal("y", ["0", "1"]),
                    values: hs,
                }),
            )
            .unwrap()
        }
    };
    let train = make(n_train, false);
    let aux = make(n_aux, true);
    (train, aux)
}

fn fast_cfg() -> GenerationConfig {
    GenerationConfig {
        secondary_spec: LearnerSpec::new(learners::Algorithm::RandomForest(learners::ForestParams {
            trees: 15,
            ..Default::default()
        })),
        ..GenerationConfig::default()
    }
}

fn exact(train: &Dataset, aux: &Dataset) -> FeatureMatching {
    match_features(train, aux, &MatchStrategy::ExactName).unwrap()
}

#[test]
fn empty_intersection_gives_nothing() {
    let (train, aux) = planted(40, 40, 2, 1);
    let m = FeatureMatching {
        pairs: vec![],
        unmatched_aux: aux.feature_names().map(String::from).collect(),
    };
    let a = Auxiliary {
        name: "aux",
        data: &aux,
        matching: &m,
    };
    assert!(kbfg(&train, &a, &fast_cfg()).unwrap().is_empty());
}

#[test]
fn planted_xor_is_recovered() {
    let (train, aux) = planted(120, 400, 3, 2);
    let m = exact(&train, &aux);
    assert_eq!(m.unmatched_aux, vec!["h", "z"]);
    let cfg = fast_cfg();
    let a = Auxiliary {
        name: "aux",
        data: &aux,
        matching: &m,
    };
    let out = kbfg(&train, &a, &cfg).unwrap();
    assert!(!out.is_empty());
    let h = out.iter().find(|f| f.source_target == "h").expect("h accepted");
    assert_eq!(h.name, "gen_aux_h");
    assert_eq!(h.kind, FeatureKind::Continuous);
    assert!(h.utility_at_acceptance > 0.0);
    let base = cfg.wrapper_cv(&train).unwrap();
    let enhanced = cfg.wrapper_cv(&enhance(&train, &out).unwrap()).unwrap();
    assert!(enhanced >= base + 0.2, "{base} -> {enhanced}");
    for f in &out {
        assert!(f.utility_at_acceptance > 0.0);
        let on_aux = f.values_on_aux("aux", &aux).unwrap();
        assert_eq!(on_aux.len(), aux.n_rows());
    }
}

#[test]
fn output_is_invariant_to_aux_row_order() {
    let (train, aux) = planted(80, 150, 3, 3);
    let m = exact(&train, &aux);
    let mut order: Vec<usize> = (0..aux.n_rows()).collect();
    order.shuffle(&mut rng::seeded(99));
    let shuffled = aux.select_rows(&order);
    let cfg = fast_cfg();
    let run = |d: &Dataset| {
        let a = Auxiliary {
            name: "aux",
            data: d,
            matching: &m,
        };
        let out = kbfg(&train, &a, &cfg).unwrap();
        let names: Vec<String> = out.iter().map(|f| f.name.clone()).collect();
        (names, enhance(&train, &out).unwrap())
    };
    assert_eq!(run(&aux), run(&shuffled));
}

#[test]
fn aux_label_is_a_target_and_counts_follow_the_matching() {
    let names_t = ["Pregnancies", "Glucose", "BloodPressure", "SkinThickness", "Insulin", "BMI", "DiabetesPedigreeFunction", "Age"];
    let names_a = ["Age", "BMI", "Glucose", "Insulin", "HOMA", "Leptin", "Adiponectin", "Resistin", "MCP1"];
    let mut r = rng::seeded(5);
    let mut build = |names: &[&str], n: usize, label: &str| {
        let features: Vec<Feature> = names.iter().map(|&s| Feature::continuous(s)).collect();
        let cols: Vec<Vec<Value>> = names
            .iter()
            .map(|_| (0..n).map(|_| Value::Num(r.random::<f64>())).collect())
            .collect();
        let y = (0..n).map(|i| Value::Cat((i % 2) as u32)).collect();
        Dataset::new(
            features,
            cols,
            n,
            Some(Label {
                feature: Feature::nominal(label, ["1", "2"]),
                values: y,
            }),
        )
        .unwrap()
    };
    let train = build(&names_t, 40, "Outcome");
    let aux = build(&names_a, 60, "Classification");
    let m = exact(&train, &aux);
    assert_eq!((m.pairs.len(), m.unmatched_aux.len()), (4, 5));
    let a = Auxiliary {
        name: "bc",
        data: &aux,
        matching: &m,
    };
    let run = Engine::new(Sequential)
        .kbfg_run(&train, &a, &fast_cfg(), &BTreeSet::new())
        .unwrap();
    assert_eq!((run.n_shared, run.n_aux_only), (4, 5));
    let features: Vec<&str> = run.candidates.iter().filter(|c| !c.is_label).map(|c| c.target.as_str()).collect();
    assert_eq!(features, ["HOMA", "Leptin", "Adiponectin", "Resistin", "MCP1"]);
    assert_eq!(run.candidates.iter().filter(|c| c.is_label).count(), 1);
    let without_label = GenerationConfig {
        include_aux_label: false,
        ..fast_cfg()
    };
    let run = Engine::new(Sequential)
        .kbfg_run(&train, &a, &without_label, &BTreeSet::new())
        .unwrap();
    assert_eq!(run.candidates.len(), 5);
}

#[test]
fn recurrent_mode_feeds_accepted_features_forward() {
    // h2 = h XOR c, learnable once h is available as an input.
    let (train, aux) = planted(150, 400, 2, 7);
    let cfg = GenerationConfig {
        recurrent: true,
        ..fast_cfg()
    };
    let m = exact(&train, &aux);
    let a = Auxiliary {
        name: "aux",
        data: &aux,
        matching: &m,
    };
    let out = kbfg(&train, &a, &cfg).unwrap();
    let shared = m.pairs.len();
    for (i, f) in out.iter().enumerate() {
        let inputs = &f.approximations[0].inputs;
        assert_eq!(inputs.len(), shared + i);
        for prev in &out[..i] {
            assert!(inputs.iter().any(|b| b.train == prev.name && b.aux == prev.source_target));
        }
        f.values_on_aux("aux", &aux).unwrap();
    }
    let enhanced = enhance(&train, &out).unwrap();
    assert_eq!(enhanced.n_features(), train.n_features() + out.len());
}

#[test]
fn star_with_one_auxiliary_is_a_subset() {
    let (train, aux) = planted(100, 200, 4, 11);
    let m = exact(&train, &aux);
    let a = Auxiliary {
        name: "aux",
        data: &aux,
        matching: &m,
    };
    let cfg = fast_cfg();
    let single: Vec<String> = kbfg(&train, &a, &cfg).unwrap().into_iter().map(|f| f.name).collect();
    let star = kbfg_star(&train, &[a], &cfg).unwrap();
    assert!(star.iter().all(|f| single.contains(&f.name)));
    assert!(kbfg_star(&train, &[], &cfg).is_err());
}

#[test]
fn star_without_stage_one_acceptances_is_empty() {
    let (train, _) = planted(60, 10, 1, 12);
    let blank = |name: &str| {
        let n = 50;
        Dataset::new(
            vec![Feature::continuous("a"), Feature::continuous(name)],
            vec![(0..n).map(|i| Value::Num(i as f64)).collect(), vec![Value::Missing; n]],
            n,
            None,
        )
        .unwrap()
    };
    let (a1, a2) = (blank("p"), blank("q"));
    let (m1, m2) = (exact(&train, &a1), exact(&train, &a2));
    let auxes = [
        Auxiliary {
            name: "one",
            data: &a1,
            matching: &m1,
        },
        Auxiliary {
            name: "two",
            data: &a2,
            matching: &m2,
        },
    ];
    assert!(kbfg_star(&train, &auxes, &fast_cfg()).unwrap().is_empty());
}

#[test]
fn stage_two_is_ranked_by_information_gain() {
    let (train, aux) = planted(100, 200, 4, 13);
    let m = exact(&train, &aux);
    let a = Auxiliary {
        name: "aux",
        data: &aux,
        matching: &m,
    };
    let cfg = GenerationConfig {
        recurrent: true,
        ..fast_cfg()
    };
    let engine = Engine::new(Sequential);
    let pooled = engine.pool(&train, &[a], &cfg).unwrap();
    let mut candidates = pooled.accepted.clone();
    candidates.reverse();
    let sel = engine.select(&train, candidates, None, &cfg).unwrap();
    assert!(sel.ranked.windows(2).all(|w| w[0].1 >= w[1].1));
    let capped = engine.select(&train, pooled.accepted, Some(1), &cfg).unwrap();
    assert!(capped.ranked.len() <= 1);
}

fn constant_feature(name: &str, target: &str, source: &str, value: f64, train: &Dataset) -> GeneratedFeature {
    // A depth-one tree regressor that predicts a constant.
    let n = train.n_rows();
    let d = Dataset::new(
        vec![Feature::continuous("a")],
        vec![vec![Value::Num(0.0); n]],
        n,
        Some(Label {
            feature: Feature::continuous(target),
            values: vec![Value::Num(value); n],
        }),
    )
    .unwrap();
    let predictor = learners::fit(&LearnerSpec::unpruned_tree(), &d, Target::Label).unwrap();
    GeneratedFeature {
        name: name.into(),
        kind: FeatureKind::Continuous,
        source_target: target.into(),
        approximations: vec![Approximation {
            source_dataset: source.into(),
            predictor,
            inputs: vec![InputBinding {
                train: "a".into(),
                aux: "a".into(),
            }],
        }],
        utility_at_acceptance: 0.1,
        information_gain: 0.0,
    }
}

#[test]
fn singletons_pass_through_duplicate_resolution() {
    let (train, _) = planted(40, 10, 1, 14);
    let fs = vec![
        constant_feature("g1", "t1", "s1", 1.0, &train),
        constant_feature("g2", "t2", "s1", 2.0, &train),
    ];
    assert_eq!(resolve_duplicates(fs.clone(), &train, &fast_cfg()).unwrap(), fs);
}

#[test]
fn committee_averages_continuous_duplicates() {
    let (train, _) = planted(40, 10, 1, 15);
    let fs = vec![
        constant_feature("g1", "t", "s1", 1.0, &train),
        constant_feature("g2", "t", "s2", 4.0, &train),
    ];
    let cfg = GenerationConfig {
        duplicate_policy: DuplicatePolicy::Committee,
        ..fast_cfg()
    };
    let out = resolve_duplicates(fs, &train, &cfg).unwrap();
    assert_eq!(out.len(), 1);
    assert!(out[0].is_committee());
    assert_eq!(out[0].source_dataset(), "s1+s2");
    assert_eq!(out[0].name, "gen_s1+s2_t");
    assert!(out[0].values(&train).unwrap().iter().all(|v| *v == Value::Num(2.5)));
}

#[test]
fn mixed_kinds_cannot_be_merged() {
    let (train, _) = planted(40, 10, 1, 16);
    let mut b = constant_feature("g2", "t", "s2", 4.0, &train);
    b.kind = FeatureKind::nominal(["x", "y", "z"]).unwrap();
    let fs = vec![constant_feature("g1", "t", "s1", 1.0, &train), b];
    assert_eq!(
        resolve_duplicates(fs, &train, &fast_cfg()),
        Err(Error::MixedDuplicateKinds("t".into()))
    );
}

#[test]
fn argmax_utility_keeps_the_informative_duplicate() {
    let (train, aux) = planted(120, 300, 3, 17);
    let m = exact(&train, &aux);
    let cfg = fast_cfg();
    let a = Auxiliary {
        name: "good",
        data: &aux,
        matching: &m,
    };
    let good = kbfg(&train, &a, &cfg)
        .unwrap()
        .into_iter()
        .find(|f| f.source_target == "h")
        .unwrap();
    // Same target learned from an auxiliary where h is shuffled noise.
    let mut order: Vec<usize> = (0..aux.n_rows()).collect();
    order.shuffle(&mut rng::seeded(3));
    let h = aux.column_by_name("h").unwrap();
    let noisy_h: Vec<Value> = order.iter().map(|&r| h[r]).collect();
    let keep: Vec<&str> = aux.feature_names().filter(|n| *n != "h").collect();
    let noisy = aux
        .project(&keep)
        .unwrap()
        .append_feature(Feature::nominal("h", ["no", "yes"]), noisy_h)
        .unwrap();
    let mn = exact(&train, &noisy);
    let fitted = fit_secondary(
        &working_set(
            &train,
            &Auxiliary {
                name: "bad",
                data: &noisy,
                matching: &mn,
            },
        )
        .unwrap(),
        &noisy,
        "bad",
        &TargetRef::Feature("h".into()),
        &cfg,
    )
    .unwrap();
    let Fitted::Ready(approx, kind) = fitted else { panic!() };
    let bad = GeneratedFeature {
        name: "gen_bad_h".into(),
        kind,
        source_target: "h".into(),
        approximations: vec![approx],
        utility_at_acceptance: 0.5,
        information_gain: 1.0,
    };
    let out = resolve_duplicates(vec![bad, good.clone()], &train, &cfg).unwrap();
    assert_eq!(out.len(), 1);
    assert_eq!(out[0].name, good.name);
}

#[test]
fn enhance_identities() {
    let (train, aux) = planted(60, 150, 2, 18);
    assert_eq!(enhance(&train, &[]).unwrap(), train);
    let m = exact(&train, &aux);
    let a = Auxiliary {
        name: "aux",
        data: &aux,
        matching: &m,
    };
    let out = kbfg(&train, &a, &fast_cfg()).unwrap();
    let e = enhance(&train, &out).unwrap();
    assert_eq!(e.n_features(), train.n_features() + out.len());
    let original: Vec<&str> = train.feature_names().collect();
    assert_eq!(e.project(&original).unwrap(), train);
}

#[test]
fn config_validation() {
    let bad = GenerationConfig {
        wrapper_folds: 1,
        ..GenerationConfig::default()
    };
    assert!(bad.validate().is_err());
    let bad = GenerationConfig {
        max_targets: Some(0),
        ..GenerationConfig::default()
    };
    assert!(bad.validate().is_err());
}

fn prioritization_train() -> Dataset {
    // Word-presence features: "good" appears in positive rows, "bad" in negative ones.
    let n = 10;
    let good: Vec<Value> = (0..n).map(|i| Value::Num((i % 2) as f64)).collect();
    let bad: Vec<Value> = (0..n).map(|i| Value::Num(((i + 1) % 2) as f64)).collect();
    Dataset::new(
        vec![Feature::continuous("good"), Feature::continuous("bad")],
        vec![good, bad],
        n,
        Some(Label {
            feature: Feature::nominal("y", ["neg", "pos"]),
            values: (0..n).map(|i| Value::Cat((i % 2) as u32)).collect(),
        }),
    )
    .unwrap()
}

#[test]
fn prioritization_identical_vectors_keep_input_order() {
    let table = EmbeddingTable::parse("good 1 0\nbad 0 1\nx 1 1\ny 1 1\nz 1 1\n").unwrap();
    let c: Vec<String> = ["z", "x", "y"].iter().map(|s| String::from(*s)).collect();
    let shared = vec![String::from("good"), String::from("bad")];
    assert_eq!(prioritize_targets(&c, &prioritization_train(), &shared, &table).unwrap(), c);
}

#[test]
fn prioritization_matches_hand_computed_cosines() {
    // Centroids: positive (1, 0), negative (0, 1).
    // p = (1, 0)    -> max(1, 0)          = 1
    // q = (1, 2)    -> max(1/√5, 2/√5)    = 0.894
    // r = (3, 2)    -> max(3/√13, 2/√13)  = 0.832
    // s unknown     -> last
    let table = EmbeddingTable::parse("good 1 0\nbad 0 1\np 1 0\nq 1 2\nr 3 2\n").unwrap();
    let c: Vec<String> = ["s", "r", "q", "p"].iter().map(|s| String::from(*s)).collect();
    let shared = vec![String::from("good"), String::from("bad")];
    let ranked = prioritize_targets(&c, &prioritization_train(), &shared, &table).unwrap();
    assert_eq!(ranked, ["p", "q", "r", "s"]);
}

#[test]
fn prioritization_in_kbfg_orders_targets() {
    let (train, aux) = planted(60, 100, 1, 19);
    let table = EmbeddingTable::parse("a 1 0\nb 0 1\nz 1 0\nh -1 0.2\n").unwrap();
    let m = exact(&train, &aux);
    let a = Auxiliary {
        name: "aux",
        data: &aux,
        matching: &m,
    };
    let cfg = GenerationConfig {
        prioritization: Some(table),
        include_aux_label: false,
        max_targets: Some(1),
        ..fast_cfg()
    };
    let run = Engine::new(Sequential).kbfg_run(&train, &a, &cfg, &BTreeSet::new()).unwrap();
    assert_eq!(run.candidates.len(), 1);
    assert_eq!(run.candidates[0].target, "z");
}
