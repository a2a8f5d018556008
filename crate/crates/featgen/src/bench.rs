//! Bundled benchmark configurations over public datasets. Data files are
//! looked up in a data directory (see `scripts/fetch_data.py`); match
//! tables ship with the binary.

use std::path::{Path, PathBuf};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::output::write_atomic;

pub const DATA_DIR_ENV: &str = "FEATGEN_DATA_DIR";

#[derive(Debug, Clone, Copy)]
pub struct Benchmark {
    pub name: &'static str,
    pub config: &'static str,
    /// Bundled auxiliary files (match tables) by file name.
    pub files: &'static [(&'static str, &'static str)],
}

macro_rules! bench {
    ($name:literal) => {
        Benchmark {
            name: $name,
            config: include_str!(concat!("../benchmarks/", $name, ".toml")),
            files: &[],
        }
    };
    ($name:literal, $table:literal) => {
        Benchmark {
            name: $name,
            config: include_str!(concat!("../benchmarks/", $name, ".toml")),
            files: &[($table, include_str!(concat!("../benchmarks/", $table)))],
        }
    };
}

pub const BENCHMARKS: &[Benchmark] = &[
    bench!("pima_breast_cancer", "pima_breast_cancer.tsv"),
    bench!("breast_cancer_pima", "breast_cancer_pima.tsv"),
    bench!("ilpd_hepatitis", "ilpd_hepatitis.tsv"),
    bench!("hepatitis_ilpd", "hepatitis_ilpd.tsv"),
    bench!("spectf_self"),
    bench!("qsar_self"),
];

pub fn find(name: &str) -> Result<&'static Benchmark> {
    BENCHMARKS
        .iter()
        .find(|b| b.name == name)
        .ok_or_else(|| Error::UnknownBenchmark(name.to_string()))
}

/// `$FEATGEN_DATA_DIR`, else `data/` at the workspace root.
pub fn default_data_dir() -> PathBuf {
    std::env::var_os(DATA_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data"))
}

impl Benchmark {
    /// The configuration with datasets resolved in `data_dir` and bundled
    /// files written to `bundle_dir`.
    pub fn materialize(&self, data_dir: &Path, bundle_dir: &Path) -> Result<RunConfig> {
        let mut cfg = RunConfig::parse(self.config)?;
        std::fs::create_dir_all(bundle_dir).map_err(Error::io(bundle_dir))?;
        for (name, text) in self.files {
            write_atomic(&bundle_dir.join(name), text.as_bytes())?;
        }
        let bundle_dir = crate::config::absolute(bundle_dir);
        let bundled = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = bundle_dir.join(&*p);
            }
        };
        for a in &mut cfg.auxiliaries {
            a.table.as_mut().map(bundled);
            a.embeddings.as_mut().map(bundled);
        }
        cfg.generation.prioritization.as_mut().map(bundled);
        Ok(cfg.resolved(&crate::config::absolute(data_dir)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_configs_parse() {
        for b in BENCHMARKS {
            let cfg = RunConfig::parse(b.config).unwrap_or_else(|e| panic!("{}: {e}", b.name));
            assert_eq!(cfg.protocol.folds, 10, "{}", b.name);
            assert_eq!(cfg.protocol.alpha, 0.25, "{}", b.name);
        }
        assert!(find("nope").is_err());
    }

    #[test]
    fn materialize_places_tables_and_data() {
        let tmp = tempfile::tempdir().unwrap();
        let cfg = find("pima_breast_cancer")
            .unwrap()
            .materialize(Path::new("/data"), tmp.path())
            .unwrap();
        assert_eq!(cfg.train.data, PathBuf::from("/data/pima.csv"));
        let table = cfg.auxiliaries[0].table.clone().unwrap();
        assert!(table.starts_with(tmp.path()));
        assert!(std::fs::read_to_string(table).unwrap().contains("Glucose\tGlucose"));
    }
}
