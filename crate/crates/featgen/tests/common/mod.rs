#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;

use featgen::commands::MISSING;
use featgen::dataset_io::serialize_dataset;
use featgen_core::rng;
use featgen_core::{Dataset, Feature, Label, Value};
use rand::Rng;

fn bit(r: &mut rng::Rng) -> bool {
    r.random::<bool>()
}

/// Two shared boolean features `a`, `b` and continuous distractors
/// `d0..`. The aux side adds `h = a XOR b`; the train label is `h` with
/// each row flipped with probability `noise`.
pub fn xor_fgt(n_train: usize, n_aux: usize, n_distractors: usize, noise: f64, seed: u64) -> (Dataset, Dataset) {
    let mut r = rng::seeded(seed);
    let mut make = |n: usize, aux: bool| {
        let mut features = vec![Feature::nominal("a", ["0", "1"]), Feature::nominal("b", ["0", "1"])];
        features.extend((0..n_distractors).map(|i| Feature::continuous(format!("d{i}"))));
        let mut cols: Vec<Vec<Value>> = vec![Vec::with_capacity(n); features.len()];
        let mut h = Vec::with_capacity(n);
        let mut y = Vec::with_capacity(n);
        for _ in 0..n {
            let (a, b) = (bit(&mut r), bit(&mut r));
            cols[0].push(Value::Cat(a as u32));
            cols[1].push(Value::Cat(b as u32));
            for c in cols.iter_mut().skip(2) {
                c.push(Value::Num(r.random::<f64>()));
            }
            let x = a != b;
            h.push(Value::Cat(x as u32));
            let flip = r.random::<f64>() < noise;
            y.push(Value::Cat((x != flip) as u32));
        }
        if aux {
            features.push(Feature::nominal("h", ["no", "yes"]));
            cols.push(h);
            Dataset::new(features, cols, n, None).unwrap()
        } else {
            let label = Label {
                feature: Feature::nominal("y", ["neg", "pos"]),
                values: y,
            };
            Dataset::new(features, cols, n, Some(label)).unwrap()
        }
    };
    let train = make(n_train, false);
    let aux = make(n_aux, true);
    (train, aux)
}

/// Writes `d` as `<dir>/<name>.csv` with its schema and returns the csv path.
pub fn write_dataset(dir: &Path, name: &str, d: &Dataset) -> PathBuf {
    let (csv, schema) = serialize_dataset(d, MISSING).unwrap();
    let path = dir.join(format!("{name}.csv"));
    std::fs::write(&path, csv).unwrap();
    std::fs::write(dir.join(format!("{name}.schema.toml")), schema).unwrap();
    path
}

/// A run configuration over `train.csv` and one exact-matched `aux.csv`
/// in the same directory.
pub fn xor_config(seed: u64, folds: usize, trees: usize) -> String {
    format!(
        r#"seed = {seed}

[train]
data = "train.csv"

[[aux]]
name = "aux"
data = "aux.csv"
strategy = "exact"

[generation]
algorithm = "kbfg_star"

[generation.secondary]
algorithm = "random_forest"
trees = {trees}

[protocol]
folds = {folds}
alpha = 0.25

[[protocol.learners]]
algorithm = "decision_tree"
"#
    )
}

/// A directory holding an XOR task and its configuration; returns the
/// configuration path.
pub fn xor_workspace(dir: &Path, seed: u64) -> PathBuf {
    let (train, aux) = xor_fgt(200, 300, 2, 0.05, seed);
    write_dataset(dir, "train", &train);
    write_dataset(dir, "aux", &aux);
    let cfg = dir.join("run.toml");
    std::fs::write(&cfg, xor_config(seed, 5, 20)).unwrap();
    cfg
}

pub fn featgen(args: &[&str]) -> std::process::Output {
    let out = Command::new(env!("CARGO_BIN_EXE_featgen"))
        .args(args)
        .env("RUST_LOG", "error")
        .output()
        .expect("featgen runs");
    assert!(
        out.status.success(),
        "featgen {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

/// Every file under `dir` by relative path.
pub fn dir_contents(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    for entry in std::fs::read_dir(dir).unwrap() {
        let entry = entry.unwrap();
        let path = entry.path();
        let name = entry.file_name().to_string_lossy().into_owned();
        if path.is_dir() {
            for (k, v) in dir_contents(&path) {
                out.insert(format!("{name}/{k}"), v);
            }
        } else {
            out.insert(name, std::fs::read(&path).unwrap());
        }
    }
    out
}

/// Train and test sets over shared bits `c`, `s0..s3` and distractors,
/// labeled `c ? s0^s1 : s2^s3` with label noise, plus two auxiliaries:
/// `aux1` carries `h1 = s0^s1` and `aux2` carries `h2 = s2^s3`.
pub fn three_way(n_train: usize, n_test: usize, n_aux: usize, seed: u64) -> (Dataset, Dataset, Dataset, Dataset) {
    let mut r = rng::seeded(seed);
    let mut make = |n: usize, extra: Option<&str>| {
        let mut features: Vec<Feature> = ["c", "s0", "s1", "s2", "s3"]
            .iter()
            .map(|name| Feature::nominal(*name, ["0", "1"]))
            .collect();
        features.extend((0..2).map(|i| Feature::continuous(format!("d{i}"))));
        let mut cols: Vec<Vec<Value>> = vec![Vec::with_capacity(n); features.len()];
        let mut hs = (Vec::with_capacity(n), Vec::with_capacity(n));
        let mut y = Vec::with_capacity(n);
        for _ in 0..n {
            let bits: Vec<bool> = (0..5).map(|_| bit(&mut r)).collect();
            for (c, &b) in cols.iter_mut().zip(&bits) {
                c.push(Value::Cat(b as u32));
            }
            for c in cols.iter_mut().skip(5) {
                c.push(Value::Num(r.random::<f64>()));
            }
            let (h1, h2) = (bits[1] != bits[2], bits[3] != bits[4]);
            hs.0.push(Value::Cat(h1 as u32));
            hs.1.push(Value::Cat(h2 as u32));
            let flip = r.random::<f64>() < 0.05;
            y.push(Value::Cat((if bits[0] { h1 } else { h2 } != flip) as u32));
        }
        match extra {
            Some(name) => {
                features.push(Feature::nominal(name, ["no", "yes"]));
                cols.push(if name == "h1" { hs.0 } else { hs.1 });
                Dataset::new(features, cols, n, None).unwrap()
            }
            None => {
                let label = Label {
                    feature: Feature::nominal("y", ["neg", "pos"]),
                    values: y,
                };
                Dataset::new(features, cols, n, Some(label)).unwrap()
            }
        }
    };
    let train = make(n_train, None);
    let test = make(n_test, None);
    let aux1 = make(n_aux, Some("h1"));
    let aux2 = make(n_aux, Some("h2"));
    (train, test, aux1, aux2)
}
