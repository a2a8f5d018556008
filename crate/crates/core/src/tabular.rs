//! Typed, immutable tabular data.
//!
//! A [`Dataset`] is a set of rows over an ordered feature schema, optionally
//! carrying a label column. Storage is column-major; every transformation
//! returns a new dataset and leaves its input untouched.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum FeatureKind {
    /// Categorical values drawn from an ordered, duplicate-free vocabulary.
    /// Values are stored as indices into `categories`.
    Nominal { categories: Vec<String> },
    Continuous,
}

impl FeatureKind {
    pub fn nominal<I, S>(categories: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let kind = FeatureKind::Nominal {
            categories: categories.into_iter().map(Into::into).collect(),
        };
        kind.validate()?;
        Ok(kind)
    }

    pub fn validate(&self) -> Result<()> {
        if let FeatureKind::Nominal { categories } = self {
            if categories.is_empty() {
                return Err(Error::InvalidFeature("nominal kind without categories".into()));
            }
            let mut seen = BTreeSet::new();
            for c in categories {
                if !seen.insert(c.as_str()) {
                    return Err(Error::InvalidFeature(alloc::format!("duplicate category `{c}`")));
                }
            }
        }
        Ok(())
    }

    pub fn is_nominal(&self) -> bool {
        matches!(self, FeatureKind::Nominal { .. })
    }

    pub fn categories(&self) -> Option<&[String]> {
        match self {
            FeatureKind::Nominal { categories } => Some(categories),
            FeatureKind::Continuous => None,
        }
    }

    pub fn category_index(&self, token: &str) -> Option<u32> {
        self.categories()?
            .iter()
            .position(|c| c == token)
            .map(|i| i as u32)
    }

    fn admits(&self, value: &Value) -> bool {
        match (self, value) {
            (_, Value::Missing) => true,
            (FeatureKind::Continuous, Value::Num(x)) => x.is_finite(),
            (FeatureKind::Nominal { categories }, Value::Cat(i)) => (*i as usize) < categories.len(),
            _ => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Feature {
    pub name: String,
    pub kind: FeatureKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
}

impl Feature {
    pub fn new(name: impl Into<String>, kind: FeatureKind) -> Self {
        Feature {
            name: name.into(),
            kind,
            description: None,
        }
    }

    pub fn continuous(name: impl Into<String>) -> Self {
        Feature::new(name, FeatureKind::Continuous)
    }

    /// Panics if `categories` is empty or has duplicates.
    pub fn nominal<I, S>(name: impl Into<String>, categories: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Feature::new(name, FeatureKind::nominal(categories).expect("valid categories"))
    }

    pub fn with_description(mut self, description: impl Into<String>) -> Self {
        self.description = Some(description.into());
        self
    }
}

/// One cell. Nominal cells hold an index into the feature's category list.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Value {
    Missing,
    Num(f64),
    Cat(u32),
}

impl Value {
    pub fn is_missing(&self) -> bool {
        matches!(self, Value::Missing)
    }

    pub fn as_num(&self) -> Option<f64> {
        match *self {
            Value::Num(x) => Some(x),
            _ => None,
        }
    }

    pub fn as_cat(&self) -> Option<u32> {
        match *self {
            Value::Cat(c) => Some(c),
            _ => None,
        }
    }

    /// Total order used for canonical row sorting: missing < numbers < categories.
    pub fn total_cmp(&self, other: &Value) -> Ordering {
        fn rank(v: &Value) -> u8 {
            match v {
                Value::Missing => 0,
                Value::Num(_) => 1,
                Value::Cat(_) => 2,
            }
        }
        match (self, other) {
            (Value::Num(a), Value::Num(b)) => a.total_cmp(b),
            (Value::Cat(a), Value::Cat(b)) => a.cmp(b),
            _ => rank(self).cmp(&rank(other)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Label {
    pub feature: Feature,
    pub values: Vec<Value>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<Feature>,
    columns: Vec<Vec<Value>>,
    n_rows: usize,
    label: Option<Label>,
}

impl Dataset {
    /// Builds a dataset from columns. `n_rows` is explicit so that a dataset
    /// with no features still knows how many objects it describes.
    pub fn new(
        features: Vec<Feature>,
        columns: Vec<Vec<Value>>,
        n_rows: usize,
        label: Option<Label>,
    ) -> Result<Self> {
        if features.len() != columns.len() {
            return Err(Error::InvalidFeature(alloc::format!(
                "{} features but {} columns",
                features.len(),
                columns.len()
            )));
        }
        let mut names = BTreeSet::new();
        for (f, col) in features.iter().zip(&columns) {
            check_column(f, col, n_rows)?;
            if !names.insert(f.name.as_str()) {
                return Err(Error::DuplicateFeature(f.name.clone()));
            }
        }
        if let Some(l) = &label {
            check_column(&l.feature, &l.values, n_rows)?;
            if names.contains(l.feature.name.as_str()) {
                return Err(Error::DuplicateFeature(l.feature.name.clone()));
            }
        }
        Ok(Dataset {
            features,
            columns,
            n_rows,
            label,
        })
    }

    /// Builds a dataset from row vectors.
    pub fn from_rows(features: Vec<Feature>, rows: &[Vec<Value>], label: Option<Label>) -> Result<Self> {
        let mut columns = alloc::vec![Vec::with_capacity(rows.len()); features.len()];
        for (r, row) in rows.iter().enumerate() {
            if row.len() != features.len() {
                return Err(Error::LengthMismatch {
                    name: alloc::format!("row {r}"),
                    expected: features.len(),
                    got: row.len(),
                });
            }
            for (col, v) in columns.iter_mut().zip(row) {
                col.push(*v);
            }
        }
        Dataset::new(features, columns, rows.len(), label)
    }

    pub fn features(&self) -> &[Feature] {
        &self.features
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_features(&self) -> usize {
        self.features.len()
    }

    pub fn feature_names(&self) -> impl Iterator<Item = &str> {
        self.features.iter().map(|f| f.name.as_str())
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.features.iter().position(|f| f.name == name)
    }

    pub fn feature(&self, name: &str) -> Option<&Feature> {
        self.features.iter().find(|f| f.name == name)
    }

    pub fn column(&self, index: usize) -> &[Value] {
        &self.columns[index]
    }

    pub fn column_by_name(&self, name: &str) -> Option<&[Value]> {
        self.feature_index(name).map(|i| self.columns[i].as_slice())
    }

    pub fn label(&self) -> Option<&Label> {
        self.label.as_ref()
    }

    pub fn is_labeled(&self) -> bool {
        self.label.is_some()
    }

    pub fn row(&self, index: usize) -> Vec<Value> {
        self.columns.iter().map(|c| c[index]).collect()
    }

    /// Label values as class indices. Fails if the dataset is unlabeled, the
    /// label is continuous, or any label is missing.
    pub fn class_labels(&self) -> Result<Vec<u32>> {
        let label = self.label.as_ref().ok_or(Error::Unlabeled)?;
        if !label.feature.kind.is_nominal() {
            return Err(Error::NotClassification(label.feature.name.clone()));
        }
        label
            .values
            .iter()
            .enumerate()
            .map(|(row, v)| {
                v.as_cat().ok_or_else(|| Error::KindViolation {
                    row,
                    column: label.feature.name.clone(),
                })
            })
            .collect()
    }

    /// Min-max rescales every continuous feature to [0, 1] using this
    /// dataset's own extrema. Constant columns become 0; nominal columns,
    /// missing cells and the label are unchanged.
    pub fn normalize(&self) -> Dataset {
        let columns = self
            .features
            .iter()
            .zip(&self.columns)
            .map(|(f, col)| match f.kind {
                FeatureKind::Continuous => min_max(col),
                FeatureKind::Nominal { .. } => col.clone(),
            })
            .collect();
        Dataset {
            features: self.features.clone(),
            columns,
            n_rows: self.n_rows,
            label: self.label.clone(),
        }
    }

    /// Restricts the dataset to `names`, in the given order.
    pub fn project<S: AsRef<str>>(&self, names: &[S]) -> Result<Dataset> {
        let mut features = Vec::with_capacity(names.len());
        let mut columns = Vec::with_capacity(names.len());
        for name in names {
            let name = name.as_ref();
            let i = self
                .feature_index(name)
                .ok_or_else(|| Error::UnknownFeature(name.to_string()))?;
            features.push(self.features[i].clone());
            columns.push(self.columns[i].clone());
        }
        Dataset::new(features, columns, self.n_rows, self.label.clone())
    }

    /// Returns a copy with `feature` appended as the last column.
    pub fn append_feature(&self, feature: Feature, values: Vec<Value>) -> Result<Dataset> {
        if self.feature_index(&feature.name).is_some()
            || self.label.as_ref().is_some_and(|l| l.feature.name == feature.name)
        {
            return Err(Error::DuplicateFeature(feature.name));
        }
        check_column(&feature, &values, self.n_rows)?;
        let mut out = self.clone();
        out.features.push(feature);
        out.columns.push(values);
        Ok(out)
    }

    /// Keeps the given rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Dataset {
        let pick = |col: &Vec<Value>| rows.iter().map(|&r| col[r]).collect::<Vec<_>>();
        Dataset {
            features: self.features.clone(),
            columns: self.columns.iter().map(pick).collect(),
            n_rows: rows.len(),
            label: self.label.as_ref().map(|l| Label {
                feature: l.feature.clone(),
                values: pick(&l.values),
            }),
        }
    }

    /// Renames features; names absent from `renames` keep their name.
    pub fn rename<S: AsRef<str>>(&self, renames: &[(S, S)]) -> Result<Dataset> {
        let mut features = self.features.clone();
        for (from, to) in renames {
            let i = self
                .feature_index(from.as_ref())
                .ok_or_else(|| Error::UnknownFeature(from.as_ref().to_string()))?;
            features[i].name = to.as_ref().to_string();
        }
        Dataset::new(features, self.columns.clone(), self.n_rows, self.label.clone())
    }

    pub fn with_label(&self, label: Option<Label>) -> Result<Dataset> {
        Dataset::new(self.features.clone(), self.columns.clone(), self.n_rows, label)
    }

    /// Row permutation that sorts rows lexicographically by all feature
    /// values, then by label. Stable for identical rows.
    pub fn canonical_row_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.n_rows).collect();
        order.sort_by(|&a, &b| {
            for col in self.columns.iter().chain(self.label.iter().map(|l| &l.values)) {
                match col[a].total_cmp(&col[b]) {
                    Ordering::Equal => continue,
                    other => return other,
                }
            }
            Ordering::Equal
        });
        order
    }
}

fn check_column(feature: &Feature, values: &[Value], n_rows: usize) -> Result<()> {
    if feature.name.is_empty() {
        return Err(Error::InvalidFeature("empty feature name".into()));
    }
    feature.kind.validate()?;
    if values.len() != n_rows {
        return Err(Error::LengthMismatch {
            name: feature.name.clone(),
            expected: n_rows,
            got: values.len(),
        });
    }
    if let Some(row) = values.iter().position(|v| !feature.kind.admits(v)) {
        return Err(Error::KindViolation {
            row,
            column: feature.name.clone(),
        });
    }
    Ok(())
}

fn min_max(col: &[Value]) -> Vec<Value> {
    let (lo, hi) = col
        .iter()
        .filter_map(Value::as_num)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
    let span = hi - lo;
    col.iter()
        .map(|v| match *v {
            Value::Num(_) if !(span > 0.0) => Value::Num(0.0),
            Value::Num(x) => Value::Num(((x - lo) / span).clamp(0.0, 1.0)),
            other => other,
        })
        .collect()
}
