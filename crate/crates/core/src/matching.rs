//! Correspondence between training and auxiliary features.
//!
//! Every strategy produces candidate pairs with a score in [0, 1]; pairs are
//! then accepted greedily, best score first, each feature used at most once.
//! Equal scores are taken in lexicographic (train name, aux name) order.
//! Paired features must have identical kinds, including category lists.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::tabular::{Dataset, Feature, FeatureKind, Value};
use crate::{Error, Result};

pub const DEFAULT_FUZZY_DISTANCE: f64 = 0.2;
pub const DEFAULT_DISTRIBUTION_DISTANCE: f64 = 0.1;
pub const DEFAULT_MIN_COSINE: f64 = 0.8;

#[derive(Debug, Clone, PartialEq)]
pub enum MatchStrategy {
    /// Explicit (train name, aux name) pairs.
    ManualTable(Vec<(String, String)>),
    /// Names equal after lowercasing.
    ExactName,
    /// Canonicalized names within a normalized edit distance.
    FuzzyName { max_distance: f64 },
    /// Mean token vectors of the names (and descriptions) at least this similar.
    Embedding { table: EmbeddingTable, min_cosine: f64 },
    /// Value distributions within a KS / total-variation distance.
    Distribution { max_distance: f64 },
}

impl MatchStrategy {
    pub fn validate(&self) -> Result<()> {
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        match self {
            MatchStrategy::FuzzyName { max_distance } | MatchStrategy::Distribution { max_distance }
                if !unit(*max_distance) =>
            {
                Err(Error::InvalidConfig("distance threshold must be in [0, 1]".into()))
            }
            MatchStrategy::Embedding { min_cosine, .. } if !(-1.0..=1.0).contains(min_cosine) => {
                Err(Error::InvalidConfig("min_cosine must be in [-1, 1]".into()))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchedPair {
    pub train: String,
    pub aux: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatching {
    /// In acceptance order.
    pub pairs: Vec<MatchedPair>,
    /// Aux features without a partner, in aux schema order. The aux label is
    /// not a feature and never appears here.
    pub unmatched_aux: Vec<String>,
}

impl FeatureMatching {
    pub fn aux_for(&self, train: &str) -> Option<&str> {
        self.pairs.iter().find(|p| p.train == train).map(|p| p.aux.as_str())
    }

    pub fn train_for(&self, aux: &str) -> Option<&str> {
        self.pairs.iter().find(|p| p.aux == aux).map(|p| p.train.as_str())
    }
}

/// Token vectors for the embedding strategy and for target prioritization.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EmbeddingTable {
    dim: usize,
    vectors: BTreeMap<String, Vec<f64>>,
}

impl EmbeddingTable {
    /// Parses `token v1 v2 .. vd` lines. Blank lines are skipped; tokens are
    /// lowercased; every vector must have the same dimension.
    pub fn parse(text: &str) -> Result<Self> {
        let mut table = EmbeddingTable::default();
        for (i, line) in text.lines().enumerate() {
            let mut parts = line.split_whitespace();
            let Some(token) = parts.next() else { continue };
            let v: core::result::Result<Vec<f64>, _> = parts.map(str::parse::<f64>).collect();
            let v = v.map_err(|_| Error::Matching(alloc::format!("line {}: bad number", i + 1)))?;
            table
                .insert(token, v)
                .map_err(|e| Error::Matching(alloc::format!("line {}: {e}", i + 1)))?;
        }
        Ok(table)
    }

    pub fn insert(&mut self, token: &str, v: Vec<f64>) -> Result<()> {
        if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
            return Err(Error::Matching("empty or non-finite vector".into()));
        }
        if self.vectors.is_empty() {
            self.dim = v.len();
        } else if v.len() != self.dim {
            return Err(Error::Matching(alloc::format!(
                "vector of dimension {} in a table of dimension {}",
                v.len(),
                self.dim
            )));
        }
        self.vectors.insert(token.to_lowercase(), v);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.vectors.get(token).map(Vec::as_slice)
    }

    /// Mean vector of the known tokens of `text`; `None` if none is known.
    pub fn embed(&self, text: &str) -> Option<Vec<f64>> {
        let mut sum = alloc::vec![0.0; self.dim];
        let mut n = 0usize;
        for t in tokenize(text) {
            if let Some(v) = self.get(&t) {
                sum.iter_mut().zip(v).for_each(|(s, x)| *s += x);
                n += 1;
            }
        }
        (n > 0).then(|| sum.into_iter().map(|s| s / n as f64).collect())
    }
}

/// Cosine similarity; 0 when either vector is zero.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = libm::sqrt(a.iter().map(|x| x * x).sum());
    let nb = libm::sqrt(b.iter().map(|x| x * x).sum());
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        (dot / (na * nb)).clamp(-1.0, 1.0)
    }
}

/// Parses `train_name <TAB> aux_name` lines. Blank lines and lines starting
/// with `#` are skipped.
pub fn parse_manual_table(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split('\t');
        match (parts.next(), parts.next(), parts.next()) {
            (Some(a), Some(b), None) if !a.trim().is_empty() && !b.trim().is_empty() => {
                out.push((a.trim().to_string(), b.trim().to_string()));
            }
            _ => {
                return Err(Error::Matching(alloc::format!(
                    "line {}: expected `train_name<TAB>aux_name`",
                    i + 1
                )))
            }
        }
    }
    Ok(out)
}

/// Minimum number of single-character insertions, deletions and
/// substitutions turning `a` into `b`.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = alloc::vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        core::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Splits a name into lowercase word tokens at non-alphanumeric characters
/// and at lower-to-upper case transitions ("BloodPressure" → blood, pressure).
pub fn tokenize(name: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut cur = String::new();
    let mut prev_lower = false;
    for ch in name.chars() {
        if !ch.is_alphanumeric() {
            if !cur.is_empty() {
                tokens.push(core::mem::take(&mut cur));
            }
            prev_lower = false;
            continue;
        }
        if ch.is_uppercase() && prev_lower && !cur.is_empty() {
            tokens.push(core::mem::take(&mut cur));
        }
        prev_lower = ch.is_lowercase() || ch.is_numeric();
        cur.extend(ch.to_lowercase());
    }
    if !cur.is_empty() {
        tokens.push(cur);
    }
    tokens
}

/// Suffix stripper. The first matching rule applies, and only when at least
/// three characters remain:
///
/// | suffix | replacement |
/// |--------|-------------|
/// | sses   | ss          |
/// | ies    | y           |
/// | ss     | ss          |
/// | s      |             |
/// | ing    |             |
/// | ed     |             |
/// | ly     |             |
pub fn stem(token: &str) -> String {
    const RULES: [(&str, &str); 7] = [
        ("sses", "ss"),
        ("ies", "y"),
        ("ss", "ss"),
        ("s", ""),
        ("ing", ""),
        ("ed", ""),
        ("ly", ""),
    ];
    for (suffix, repl) in RULES {
        if let Some(base) = token.strip_suffix(suffix) {
            if base.chars().count() >= 3 {
                let mut s = base.to_string();
                s.push_str(repl);
                return s;
            }
            return token.to_string();
        }
    }
    token.to_string()
}

/// Lowercased, stemmed tokens joined without separators.
pub fn canonicalize(name: &str) -> String {
    tokenize(name).iter().map(|t| stem(t)).collect()
}

/// Levenshtein distance of the canonical forms divided by the longer length.
pub fn normalized_name_distance(a: &str, b: &str) -> f64 {
    let (a, b) = (canonicalize(a), canonicalize(b));
    let longest = a.chars().count().max(b.chars().count());
    if longest == 0 {
        0.0
    } else {
        levenshtein(&a, &b) as f64 / longest as f64
    }
}

/// Two-sample Kolmogorov–Smirnov statistic over the observed values.
fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len(), b.len());
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < na || j < nb {
        let v = match (a.get(i), b.get(j)) {
            (Some(x), Some(y)) => x.min(*y),
            (Some(x), None) => *x,
            (None, Some(y)) => *y,
            (None, None) => unreachable!(),
        };
        while i < na && a[i] <= v {
            i += 1;
        }
        while j < nb && b[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / na as f64 - j as f64 / nb as f64).abs());
    }
    d
}

fn category_frequencies(f: &Feature, values: &[Value]) -> (BTreeMap<String, f64>, usize) {
    let cats = f.kind.categories().unwrap_or(&[]);
    let mut freq = BTreeMap::new();
    let mut n = 0usize;
    for c in values.iter().filter_map(Value::as_cat) {
        *freq.entry(cats[c as usize].clone()).or_insert(0.0) += 1.0;
        n += 1;
    }
    freq.values_mut().for_each(|v| *v /= n as f64);
    (freq, n)
}

/// Distance between the value distributions of two features, ignoring
/// missing cells: the KS statistic for continuous features, the total
/// variation distance over category names for nominal ones.
pub fn distribution_distance(fa: &Feature, a: &[Value], fb: &Feature, b: &[Value]) -> Result<f64> {
    match (&fa.kind, &fb.kind) {
        (FeatureKind::Continuous, FeatureKind::Continuous) => {
            let xa: Vec<f64> = a.iter().filter_map(Value::as_num).collect();
            let xb: Vec<f64> = b.iter().filter_map(Value::as_num).collect();
            if xa.is_empty() || xb.is_empty() {
                return Err(Error::Matching("no observed values to compare".into()));
            }
            Ok(ks_statistic(&xa, &xb))
        }
        (FeatureKind::Nominal { .. }, FeatureKind::Nominal { .. }) => {
            let (pa, na) = category_frequencies(fa, a);
            let (pb, nb) = category_frequencies(fb, b);
            if na == 0 || nb == 0 {
                return Err(Error::Matching("no observed values to compare".into()));
            }
            let keys: BTreeSet<&String> = pa.keys().chain(pb.keys()).collect();
            let tv: f64 = keys
                .into_iter()
                .map(|k| (pa.get(k).unwrap_or(&0.0) - pb.get(k).unwrap_or(&0.0)).abs())
                .sum::<f64>()
                / 2.0;
            Ok(tv.clamp(0.0, 1.0))
        }
        _ => Err(Error::KindMismatch(alloc::format!("{} / {}", fa.name, fb.name))),
    }
}

struct Candidate<'a> {
    train: &'a str,
    aux: &'a str,
    score: f64,
}

fn embedding_similarity(table: &EmbeddingTable, t: &Feature, a: &Feature) -> Option<f64> {
    let (vt, va) = match (table.embed(&t.name), table.embed(&a.name)) {
        (Some(vt), Some(va)) => (vt, va),
        (vt, va) => {
            if vt.is_none() {
                log::warn!("no embedding for train feature `{}`; skipped", t.name);
            }
            if va.is_none() {
                log::warn!("no embedding for aux feature `{}`; skipped", a.name);
            }
            return None;
        }
    };
    let names = cosine(&vt, &va);
    let descriptions = match (&t.description, &a.description) {
        (Some(dt), Some(da)) => match (table.embed(dt), table.embed(da)) {
            (Some(x), Some(y)) => Some(cosine(&x, &y)),
            _ => None,
        },
        _ => None,
    };
    Some(match descriptions {
        Some(d) => (names + d) / 2.0,
        None => names,
    })
}

/// Pairs features of `train` with features of `aux` under `strategy`.
pub fn match_features(train: &Dataset, aux: &Dataset, strategy: &MatchStrategy) -> Result<FeatureMatching> {
    strategy.validate()?;
    let mut candidates: Vec<Candidate<'_>> = Vec::new();
    match strategy {
        MatchStrategy::ManualTable(rows) => {
            let mut seen_t = BTreeSet::new();
            let mut seen_a = BTreeSet::new();
            for (t, a) in rows {
                let ft = train
                    .feature(t)
                    .ok_or_else(|| Error::Matching(alloc::format!("manual table: unknown train feature `{t}`")))?;
                let fa = aux
                    .feature(a)
                    .ok_or_else(|| Error::Matching(alloc::format!("manual table: unknown aux feature `{a}`")))?;
                if ft.kind != fa.kind {
                    return Err(Error::Matching(alloc::format!(
                        "manual table: `{t}` and `{a}` have different kinds"
                    )));
                }
                if !seen_t.insert(t.as_str()) || !seen_a.insert(a.as_str()) {
                    return Err(Error::Matching(alloc::format!(
                        "manual table: `{t}` / `{a}` is not one-to-one"
                    )));
                }
                candidates.push(Candidate {
                    train: &ft.name,
                    aux: &fa.name,
                    score: 1.0,
                });
            }
        }
        _ => {
            for (ti, ft) in train.features().iter().enumerate() {
                for (ai, fa) in aux.features().iter().enumerate() {
                    if ft.kind != fa.kind {
                        continue;
                    }
                    let score = match strategy {
                        MatchStrategy::ExactName => (ft.name.to_lowercase() == fa.name.to_lowercase()).then_some(1.0),
                        MatchStrategy::FuzzyName { max_distance } => {
                            let d = normalized_name_distance(&ft.name, &fa.name);
                            (d <= *max_distance).then_some(1.0 - d)
                        }
                        MatchStrategy::Embedding { table, min_cosine } => embedding_similarity(table, ft, fa)
                            .filter(|c| c >= min_cosine)
                            .map(|c| (c + 1.0) / 2.0),
                        MatchStrategy::Distribution { max_distance } => {
                            match distribution_distance(ft, train.column(ti), fa, aux.column(ai)) {
                                Ok(d) if d <= *max_distance => Some(1.0 - d),
                                _ => None,
                            }
                        }
                        MatchStrategy::ManualTable(_) => unreachable!(),
                    };
                    if let Some(score) = score {
                        candidates.push(Candidate {
                            train: &ft.name,
                            aux: &fa.name,
                            score,
                        });
                    }
                }
            }
        }
    }
    candidates.sort_by(|x, y| {
        y.score
            .total_cmp(&x.score)
            .then_with(|| x.train.cmp(y.train))
            .then_with(|| x.aux.cmp(y.aux))
    });
    let mut used_t = BTreeSet::new();
    let mut used_a = BTreeSet::new();
    let mut pairs = Vec::new();
    for c in candidates {
        if used_t.contains(c.train) || used_a.contains(c.aux) {
            continue;
        }
        used_t.insert(c.train);
        used_a.insert(c.aux);
        pairs.push(MatchedPair {
            train: c.train.to_string(),
            aux: c.aux.to_string(),
            score: c.score,
        });
    }
    let unmatched_aux = aux
        .feature_names()
        .filter(|n| !used_a.contains(n))
        .map(ToString::to_string)
        .collect();
    Ok(FeatureMatching { pairs, unmatched_aux })
}
