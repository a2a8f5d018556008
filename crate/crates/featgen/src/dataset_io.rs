//! CSV data files with a TOML schema.
//!
//! ```toml
//! missing = "?"
//! label = "Outcome"
//!
//! [[column]]
//! name = "Glucose"
//! kind = "continuous"
//! description = "plasma glucose concentration"
//!
//! [[column]]
//! name = "Outcome"
//! kind = "nominal"
//! categories = ["0", "1"]
//! ```
//!
//! Every CSV column must be declared and every declared column must be in
//! the CSV. Feature order follows the CSV header; the label column is taken
//! out of the features wherever it appears.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use featgen_core::{Dataset, Feature, FeatureKind, Label, Value};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schema {
    /// Cell text that marks a missing value.
    #[serde(default)]
    pub missing: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(rename = "column", default)]
    pub columns: Vec<ColumnSchema>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    Continuous,
    Nominal,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSchema {
    pub name: String,
    pub kind: ColumnKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub categories: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
}

impl ColumnSchema {
    fn feature(&self) -> Result<Feature> {
        let kind = match (self.kind, &self.categories) {
            (ColumnKind::Continuous, None) => FeatureKind::Continuous,
            (ColumnKind::Continuous, Some(_)) => {
                return Err(Error::Schema(format!("continuous column `{}` lists categories", self.name)))
            }
            (ColumnKind::Nominal, Some(c)) => FeatureKind::nominal(c)
                .map_err(|e| Error::Schema(format!("column `{}`: {e}", self.name)))?,
            (ColumnKind::Nominal, None) => {
                return Err(Error::Schema(format!("nominal column `{}` needs categories", self.name)))
            }
        };
        let mut f = Feature::new(self.name.clone(), kind);
        f.description = self.description.clone();
        Ok(f)
    }

    fn from_feature(f: &Feature) -> ColumnSchema {
        let (kind, categories) = match &f.kind {
            FeatureKind::Continuous => (ColumnKind::Continuous, None),
            FeatureKind::Nominal { categories } => (ColumnKind::Nominal, Some(categories.clone())),
        };
        ColumnSchema {
            name: f.name.clone(),
            kind,
            categories,
            description: f.description.clone(),
        }
    }
}

impl Schema {
    pub fn parse(text: &str) -> Result<Schema> {
        toml::from_str(text).map_err(|e| Error::Schema(e.to_string()))
    }

    pub fn read(path: &Path) -> Result<Schema> {
        let text = std::fs::read_to_string(path).map_err(Error::io(path))?;
        Schema::parse(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Toml(e.to_string()))
    }

    /// Schema describing `d`, with the label as the last column.
    pub fn for_dataset(d: &Dataset, missing: &str) -> Schema {
        let mut columns: Vec<ColumnSchema> = d.features().iter().map(ColumnSchema::from_feature).collect();
        if let Some(l) = d.label() {
            columns.push(ColumnSchema::from_feature(&l.feature));
        }
        Schema {
            missing: missing.to_string(),
            label: d.label().map(|l| l.feature.name.clone()),
            columns,
        }
    }
}

/// `data.csv` → `data.schema.toml`.
pub fn schema_path_for(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("schema.toml")
}

/// Reads `csv_path` with the schema next to it (see [`schema_path_for`]).
pub fn load(csv_path: &Path) -> Result<Dataset> {
    read_dataset(csv_path, &schema_path_for(csv_path))
}

pub fn read_dataset(csv_path: &Path, schema_path: &Path) -> Result<Dataset> {
    let schema = Schema::read(schema_path)?;
    let text = std::fs::read_to_string(csv_path).map_err(Error::io(csv_path))?;
    parse_dataset(&text, &schema).map_err(|e| match e {
        Error::Csv { message, .. } => Error::Csv {
            path: csv_path.to_path_buf(),
            message,
        },
        Error::Cell { .. } => Error::Parse {
            path: csv_path.to_path_buf(),
            message: e.to_string(),
        },
        e => e,
    })
}

fn parse_cell(raw: &str, feature: &Feature, missing: &str) -> std::result::Result<Value, String> {
    if raw == missing {
        return Ok(Value::Missing);
    }
    match &feature.kind {
        FeatureKind::Continuous => match raw.trim().parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(Value::Num(x)),
            _ => Err(format!("`{raw}` is not a finite number")),
        },
        FeatureKind::Nominal { .. } => feature
            .kind
            .category_index(raw)
            .or_else(|| feature.kind.category_index(raw.trim()))
            .map(Value::Cat)
            .ok_or_else(|| format!("`{raw}` is not a declared category")),
    }
}

/// Parses CSV text (header row required) under `schema`.
pub fn parse_dataset(csv_text: &str, schema: &Schema) -> Result<Dataset> {
    let csv_err = |e: csv::Error| Error::Csv {
        path: PathBuf::from("<csv>"),
        message: e.to_string(),
    };
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(csv_text.as_bytes());
    let header: Vec<String> = reader.headers().map_err(csv_err)?.iter().map(str::to_string).collect();

    let mut seen = HashSet::new();
    for h in &header {
        if !seen.insert(h.as_str()) {
            return Err(Error::Schema(format!("column `{h}` appears twice in the CSV header")));
        }
    }
    let mut declared = HashSet::new();
    for c in &schema.columns {
        if !declared.insert(c.name.as_str()) {
            return Err(Error::Schema(format!("column `{}` is declared twice", c.name)));
        }
        if !seen.contains(c.name.as_str()) {
            return Err(Error::Schema(format!("column `{}` is not in the CSV header", c.name)));
        }
    }
    if let Some(h) = header.iter().find(|h| !declared.contains(h.as_str())) {
        return Err(Error::Schema(format!("CSV column `{h}` is not declared")));
    }
    if let Some(l) = &schema.label {
        if !declared.contains(l.as_str()) {
            return Err(Error::Schema(format!("label `{l}` is not a declared column")));
        }
    }

    let specs: Vec<Feature> = header
        .iter()
        .map(|h| schema.columns.iter().find(|c| &c.name == h).expect("declared").feature())
        .collect::<Result<_>>()?;
    let mut columns: Vec<Vec<Value>> = vec![Vec::new(); header.len()];
    let mut n_rows = 0;
    for (r, record) in reader.records().enumerate() {
        let record = record.map_err(csv_err)?;
        if record.len() != header.len() {
            return Err(Error::Csv {
                path: PathBuf::from("<csv>"),
                message: format!("row {} has {} fields, expected {}", r + 1, record.len(), header.len()),
            });
        }
        for (j, raw) in record.iter().enumerate() {
            let v = parse_cell(raw, &specs[j], &schema.missing).map_err(|message| Error::Cell {
                row: r + 1,
                column: header[j].clone(),
                message,
            })?;
            columns[j].push(v);
        }
        n_rows += 1;
    }

    let mut features = Vec::new();
    let mut cols = Vec::new();
    let mut label = None;
    for ((f, col), name) in specs.into_iter().zip(columns).zip(&header) {
        if schema.label.as_deref() == Some(name.as_str()) {
            label = Some(Label { feature: f, values: col });
        } else {
            features.push(f);
            cols.push(col);
        }
    }
    Ok(Dataset::new(features, cols, n_rows, label)?)
}

fn format_cell(v: &Value, feature: &Feature, missing: &str) -> String {
    match *v {
        Value::Missing => missing.to_string(),
        Value::Num(x) => format!("{x}"),
        Value::Cat(c) => feature.kind.categories().expect("nominal")[c as usize].clone(),
    }
}

/// CSV text for `d`, label last. Numbers use the shortest text that parses
/// back to the same value.
pub fn format_dataset(d: &Dataset, missing: &str) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<&str> = d.feature_names().collect();
    if let Some(l) = d.label() {
        header.push(&l.feature.name);
    }
    let io = |e: csv::Error| Error::Csv {
        path: PathBuf::from("<csv>"),
        message: e.to_string(),
    };
    w.write_record(&header).map_err(io)?;
    for r in 0..d.n_rows() {
        let mut rec: Vec<String> = d
            .features()
            .iter()
            .enumerate()
            .map(|(j, f)| format_cell(&d.column(j)[r], f, missing))
            .collect();
        if let Some(l) = d.label() {
            rec.push(format_cell(&l.values[r], &l.feature, missing));
        }
        w.write_record(&rec).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Csv {
        path: PathBuf::from("<csv>"),
        message: e.to_string(),
    })?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// The CSV and schema texts that [`parse_dataset`] reads back into `d`.
pub fn serialize_dataset(d: &Dataset, missing: &str) -> Result<(String, String)> {
    Ok((format_dataset(d, missing)?, Schema::for_dataset(d, missing).to_toml()?))
}

#[cfg(test)]
mod tests {
    use super::*;

    const SCHEMA: &str = r#"
missing = "?"
label = "c"

[[column]]
name = "a"
kind = "continuous"

[[column]]
name = "b"
kind = "nominal"
categories = ["x", "y"]
description = "a flag"

[[column]]
name = "c"
kind = "nominal"
categories = ["no", "yes"]
"#;

    #[test]
    fn three_columns_with_label() {
        let d = parse_dataset("a,b,c\n1.5,x,yes\n?,y,no\n", &Schema::parse(SCHEMA).unwrap()).unwrap();
        assert_eq!(d.n_features(), 2);
        assert_eq!(d.n_rows(), 2);
        assert_eq!(d.column(0), &[Value::Num(1.5), Value::Missing]);
        assert_eq!(d.column(1), &[Value::Cat(0), Value::Cat(1)]);
        assert_eq!(d.label().unwrap().values, vec![Value::Cat(1), Value::Cat(0)]);
        assert_eq!(d.features()[1].description.as_deref(), Some("a flag"));
    }

    #[test]
    fn label_may_come_first() {
        let d = parse_dataset("c,a,b\nno,2,y\n", &Schema::parse(SCHEMA).unwrap()).unwrap();
        assert_eq!(d.feature_names().collect::<Vec<_>>(), ["a", "b"]);
    }

    #[test]
    fn bad_cells_are_located() {
        let schema = Schema::parse(SCHEMA).unwrap();
        match parse_dataset("a,b,c\n1,x,yes\n1,z,no\n", &schema) {
            Err(Error::Cell { row, column, .. }) => assert_eq!((row, column.as_str()), (2, "b")),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_dataset("a,b,c\nabc,x,yes\n", &schema), Err(Error::Cell { row: 1, .. })));
        assert!(matches!(parse_dataset("a,b,c\ninf,x,yes\n", &schema), Err(Error::Cell { .. })));
        assert!(matches!(parse_dataset("a,b,c\n1,x\n", &schema), Err(Error::Csv { .. })));
    }

    #[test]
    fn header_and_schema_must_agree() {
        let schema = Schema::parse(SCHEMA).unwrap();
        assert!(matches!(parse_dataset("a,b\n1,x\n", &schema), Err(Error::Schema(_))));
        assert!(matches!(parse_dataset("a,b,c,d\n1,x,no,3\n", &schema), Err(Error::Schema(_))));
        let nominal_without_categories = "[[column]]\nname = \"a\"\nkind = \"nominal\"\n";
        assert!(parse_dataset("a\nx\n", &Schema::parse(nominal_without_categories).unwrap()).is_err());
    }

    #[test]
    fn quoted_fields() {
        let schema = "label = \"y\"\n[[column]]\nname = \"y\"\nkind = \"nominal\"\ncategories = [\"a,b\", \"c\"]\n\
                      [[column]]\nname = \"x\"\nkind = \"continuous\"\n";
        let schema = Schema::parse(schema).unwrap();
        let d = parse_dataset("x,y\n1,\"a,b\"\n2,c\n", &schema).unwrap();
        assert_eq!(d.label().unwrap().values, vec![Value::Cat(0), Value::Cat(1)]);
        let (csv_text, schema_text) = serialize_dataset(&d, "?").unwrap();
        assert_eq!(parse_dataset(&csv_text, &Schema::parse(&schema_text).unwrap()).unwrap(), d);
    }

    #[test]
    fn schema_path_convention() {
        assert_eq!(schema_path_for(Path::new("data/pima.csv")), PathBuf::from("data/pima.schema.toml"));
    }
}
