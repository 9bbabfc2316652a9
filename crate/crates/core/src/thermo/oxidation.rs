use std::collections::HashMap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::composition::Composition;
use crate::element::Element;

/// What to do with elements absent from the oxidation-state table.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MissingPolicy {
    #[default]
    Strict,
    Permissive,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("oxidation table line {line}: {message}")]
pub struct OxidationTableError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, Default)]
pub struct OxidationTable {
    states: HashMap<Element, Vec<i32>>,
}

impl OxidationTable {
    /// The shipped table of common oxidation states.
    pub fn standard() -> &'static OxidationTable {
        static TABLE: OnceLock<OxidationTable> = OnceLock::new();
        TABLE.get_or_init(|| {
            OxidationTable::parse(include_str!("../../data/oxidation_states.txt")).expect("shipped table parses")
        })
    }

    /// Lines `El: s1 s2 ...`; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, OxidationTableError> {
        let mut states = HashMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fail = |message: String| OxidationTableError { line: i + 1, message };
            let (symbol, rest) = line.split_once(':').ok_or_else(|| fail("missing ':'".into()))?;
            let element = Element::from_symbol(symbol.trim()).map_err(|e| fail(e.to_string()))?;
            let values: Vec<i32> = rest
                .split_whitespace()
                .map(|t| t.parse::<i32>().map_err(|_| fail(format!("bad state '{t}'"))))
                .collect::<Result<_, _>>()?;
            if values.is_empty() {
                return Err(fail(format!("{} lists no states", element.symbol())));
            }
            states.insert(element, values);
        }
        Ok(OxidationTable { states })
    }

    pub fn states(&self, e: Element) -> Option<&[i32]> {
        self.states.get(&e).map(Vec::as_slice)
    }
}

/// Charge neutrality under some choice of one oxidation state per element.
pub fn compositional_validity(composition: &Composition, table: &OxidationTable, policy: MissingPolicy) -> bool {
    if composition.len() == 1 {
        return true;
    }
    let mut options: Vec<(f64, &[i32])> = Vec::new();
    for (e, n) in composition.iter() {
        match table.states(e) {
            Some(s) => options.push((n, s)),
            None => return policy == MissingPolicy::Permissive,
        }
    }
    let scale: f64 = composition.iter().map(|(_, n)| n).fold(0.0, f64::max);
    neutral(&options, 0.0, 1e-9 * scale.max(1.0))
}

fn neutral(options: &[(f64, &[i32])], charge: f64, eps: f64) -> bool {
    match options.split_first() {
        None => charge.abs() <= eps,
        Some(((n, states), rest)) => states.iter().any(|&s| neutral(rest, charge + n * s as f64, eps)),
    }
}
