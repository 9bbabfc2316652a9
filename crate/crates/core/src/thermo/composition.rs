use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::element::Element;
use crate::Crystal;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormulaError {
    #[error("empty formula")]
    Empty,
    #[error("unknown element '{0}'")]
    UnknownElement(String),
    #[error("element {0} has a zero count")]
    ZeroCount(String),
    #[error("unexpected character at column {0}")]
    Syntax(usize),
}

/// Element amounts, kept in atomic-number order. Counts may be fractional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Composition {
    counts: BTreeMap<Element, f64>,
}

impl Composition {
    /// Build from `(element, count)` pairs; repeated elements accumulate.
    pub fn new(pairs: impl IntoIterator<Item = (Element, f64)>) -> Result<Self, FormulaError> {
        let mut counts = BTreeMap::new();
        for (e, n) in pairs {
            if !(n.is_finite() && n > 0.0) {
                return Err(FormulaError::ZeroCount(e.symbol().into()));
            }
            *counts.entry(e).or_insert(0.0) += n;
        }
        if counts.is_empty() {
            return Err(FormulaError::Empty);
        }
        Ok(Composition { counts })
    }

    pub fn of_crystal(crystal: &Crystal) -> Result<Self, FormulaError> {
        Self::new(crystal.element_counts().into_iter().map(|(e, n)| (e, n as f64)))
    }

    pub fn elements(&self) -> impl Iterator<Item = Element> + '_ {
        self.counts.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Element, f64)> + '_ {
        self.counts.iter().map(|(e, n)| (*e, *n))
    }

    pub fn count(&self, e: Element) -> f64 {
        self.counts.get(&e).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.counts.values().sum()
    }

    /// Atomic fraction of `e`.
    pub fn fraction(&self, e: Element) -> f64 {
        self.count(e) / self.total()
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

impl FromStr for Composition {
    type Err = FormulaError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_formula(s)
    }
}

impl TryFrom<String> for Composition {
    type Error = FormulaError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        parse_formula(&s)
    }
}

impl From<Composition> for String {
    fn from(c: Composition) -> String {
        c.to_string()
    }
}

/// Elements in electronegativity order, integral counts without decimals.
impl fmt::Display for Composition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut els: Vec<Element> = self.elements().collect();
        els.sort_by(|a, b| Element::formula_order(*a, *b));
        for e in els {
            let n = self.count(e);
            if n.fract() == 0.0 && n < 1e15 {
                write!(f, "{}{}", e.symbol(), n as u64)?;
            } else {
                write!(f, "{}{}", e.symbol(), n)?;
            }
        }
        Ok(())
    }
}

/// Parse `(<Element><count>)+` where a missing count means 1 and counts may
/// be decimal.
pub fn parse_formula(text: &str) -> Result<Composition, FormulaError> {
    let text = text.trim();
    if text.is_empty() {
        return Err(FormulaError::Empty);
    }
    let bytes = text.as_bytes();
    let mut pairs = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        if !bytes[i].is_ascii_uppercase() {
            return Err(FormulaError::Syntax(i + 1));
        }
        let start = i;
        i += 1;
        while i < bytes.len() && bytes[i].is_ascii_lowercase() {
            i += 1;
        }
        let symbol = &text[start..i];
        let element = Element::from_symbol(symbol).map_err(|_| FormulaError::UnknownElement(symbol.into()))?;
        let num_start = i;
        while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
            i += 1;
        }
        let count = if num_start == i {
            1.0
        } else {
            text[num_start..i].parse::<f64>().map_err(|_| FormulaError::Syntax(num_start + 1))?
        };
        if count == 0.0 {
            return Err(FormulaError::ZeroCount(symbol.into()));
        }
        pairs.push((element, count));
    }
    Composition::new(pairs)
}
