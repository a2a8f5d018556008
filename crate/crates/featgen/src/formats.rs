//! Text formats for matching inputs and outputs.
//!
//! Manual table: one `train_name<TAB>aux_name` pair per line, `#` comments.
//! Embeddings: one `token v1 v2 .. vd` line per token.
//! Matching output: `train<TAB>aux<TAB>score` lines, then one
//! `-<TAB>aux_name` line per unmatched auxiliary feature.

use std::fmt::Write;
use std::path::Path;

use featgen_core::matching::{parse_manual_table, EmbeddingTable, FeatureMatching};

use crate::error::{Error, Result};

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(Error::io(path))
}

pub fn read_manual_table(path: &Path) -> Result<Vec<(String, String)>> {
    parse_manual_table(&read(path)?).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

pub fn read_embeddings(path: &Path) -> Result<EmbeddingTable> {
    EmbeddingTable::parse(&read(path)?).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

pub fn format_matching(m: &FeatureMatching) -> String {
    let mut s = String::new();
    for p in &m.pairs {
        let _ = writeln!(s, "{}\t{}\t{}", p.train, p.aux, p.score);
    }
    for a in &m.unmatched_aux {
        let _ = writeln!(s, "-\t{a}");
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use featgen_core::matching::MatchedPair;

    #[test]
    fn matching_text() {
        let m = FeatureMatching {
            pairs: vec![MatchedPair {
                train: "Age".into(),
                aux: "age".into(),
                score: 1.0,
            }],
            unmatched_aux: vec!["MCP.1".into()],
        };
        assert_eq!(format_matching(&m), "Age\tage\t1\n-\tMCP.1\n");
    }
}
