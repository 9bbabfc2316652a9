use std::collections::HashMap;
use std::io::BufRead;

use serde::Deserialize;
use thiserror::Error;

use super::matcher::{reduced_formula, reduced_match, MatchTolerances, Reduced, ReducedFormula};
use crate::codec::{parse_coords, parse_wyckoff, reconstruct};
use crate::{Crystal, Exec};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("reference corpus line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("reading reference corpus: {0}")]
    Io(#[from] std::io::Error),
}

/// Parse a Wyckoff block (second line `Spacegroup: ...`) or a coordinate
/// block into a crystal.
pub fn parse_block(text: &str) -> Result<Crystal, String> {
    let wyckoff = text.lines().nth(1).is_some_and(|l| l.trim_start().starts_with("Spacegroup:"));
    if wyckoff {
        let record = parse_wyckoff(text).map_err(|e| e.to_string())?;
        reconstruct(&record).map_err(|e| e.to_string())
    } else {
        parse_coords(text).map_err(|e| e.to_string())
    }
}

#[derive(Deserialize)]
struct CorpusRow {
    id: String,
    text: String,
}

/// Reference structures bucketed by reduced formula, reduced once under the
/// tolerances every query uses.
#[derive(Default)]
pub struct ReferenceIndex {
    buckets: HashMap<ReducedFormula, Vec<(String, Reduced)>>,
    count: usize,
    tol: MatchTolerances,
}

impl ReferenceIndex {
    pub fn new(entries: Vec<(String, Crystal)>, tol: MatchTolerances, exec: Exec) -> Self {
        let reduced = exec.map(&entries, |(_, c)| Reduced::new(c, &tol));
        let mut index = ReferenceIndex { tol, ..ReferenceIndex::default() };
        for ((id, _), r) in entries.into_iter().zip(reduced) {
            index.count += 1;
            index.buckets.entry(r.formula.clone()).or_default().push((id, r));
        }
        index
    }

    /// Read JSONL rows `{"id": ..., "text": ...}`. Blank lines are skipped.
    pub fn from_jsonl(reader: impl BufRead, tol: MatchTolerances, exec: Exec) -> Result<Self, CorpusError> {
        let mut entries = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let fail = |message: String| CorpusError::Line { line: i + 1, message };
            let row: CorpusRow = serde_json::from_str(&line).map_err(|e| fail(e.to_string()))?;
            let crystal = parse_block(&row.text).map_err(|e| fail(format!("{}: {e}", row.id)))?;
            entries.push((row.id, crystal));
        }
        Ok(ReferenceIndex::new(entries, tol, exec))
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn tolerances(&self) -> &MatchTolerances {
        &self.tol
    }

    /// Id of the first reference structure matching `crystal`.
    pub fn find_match(&self, crystal: &Crystal) -> Option<&str> {
        let bucket = self.buckets.get(&reduced_formula(crystal))?;
        let query = Reduced::new(crystal, &self.tol);
        bucket.iter().find(|(_, r)| reduced_match(&query, r, &self.tol)).map(|(id, _)| id.as_str())
    }

    pub fn is_novel(&self, crystal: &Crystal) -> bool {
        self.find_match(crystal).is_none()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{Element, LatticeParams, Site};

    const CORPUS: &str = r#"{"id": "nacl", "text": "Na1Cl1\nabc: 5.64 5.64 5.64\nangles: 90.00 90.00 90.00\nSites (2)\nNa 0.000 0.000 0.000\nCl 0.500 0.500 0.500\n"}

{"id": "heusler", "text": "Ti4Ni4Sn4\nSpacegroup: F-43m\nabc: 5.89 5.89 5.89\nangles: 90.00 90.00 90.00\nSites (12)\nTi 0.500 0.500 0.500 4b\nNi 0.750 0.750 0.750 4d\nSn 0.000 0.000 0.000 4a\n"}
"#;

    fn el(s: &str) -> Element {
        Element::from_symbol(s).unwrap()
    }

    #[test]
    fn reads_both_block_kinds() {
        let index = ReferenceIndex::from_jsonl(CORPUS.as_bytes(), MatchTolerances::default(), Exec::Sequential).unwrap();
        assert_eq!(index.len(), 2);
        let cscl = Crystal::new(
            LatticeParams::cubic(5.64),
            vec![Site::new(el("Na"), [0.0; 3]), Site::new(el("Cl"), [0.5; 3])],
        )
        .unwrap();
        assert_eq!(index.find_match(&cscl), Some("nacl"));
        let heusler = parse_block(&serde_json::from_str::<serde_json::Value>(CORPUS.lines().nth(2).unwrap()).unwrap()["text"].as_str().unwrap().to_string()).unwrap();
        assert!(!index.is_novel(&heusler));
        let kcl = Crystal::new(
            LatticeParams::cubic(5.64),
            vec![Site::new(el("K"), [0.0; 3]), Site::new(el("Cl"), [0.5; 3])],
        )
        .unwrap();
        assert!(index.is_novel(&kcl));
    }

    #[test]
    fn reports_bad_lines() {
        let err = ReferenceIndex::from_jsonl("{\"id\": \"x\", \"text\": \"garbage\"}\n".as_bytes(), MatchTolerances::default(), Exec::Sequential);
        assert!(matches!(err, Err(CorpusError::Line { line: 1, .. })));
    }
}
