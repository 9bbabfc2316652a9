//! Periodic table lookups.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

const ELEMENT_DATA: &str = include_str!("../data/elements.txt");

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown element symbol `{0}`")]
pub struct UnknownElement(pub String);

struct Entry {
    symbol: &'static str,
    electronegativity: Option<f64>,
}

fn table() -> &'static [Entry] {
    static TABLE: OnceLock<Vec<Entry>> = OnceLock::new();
    TABLE.get_or_init(|| {
        ELEMENT_DATA
            .lines()
            .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
            .enumerate()
            .map(|(i, line)| {
                let mut it = line.split_whitespace();
                let z: usize = it.next().and_then(|s| s.parse().ok()).expect("element number");
                assert_eq!(z, i + 1, "element table must be ordered by Z");
                let symbol = it.next().expect("element symbol");
                let electronegativity = it.next().and_then(|s| s.parse().ok());
                Entry { symbol, electronegativity }
            })
            .collect()
    })
}

/// A chemical element, stored as its atomic number.
///
/// Ordering follows the atomic number. Serializes as the element symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Element(u8);

impl Element {
    pub fn from_symbol(symbol: &str) -> Result<Self, UnknownElement> {
        table()
            .iter()
            .position(|e| e.symbol == symbol)
            .map(|i| Element(i as u8 + 1))
            .ok_or_else(|| UnknownElement(symbol.to_string()))
    }

    pub fn from_number(z: u8) -> Option<Self> {
        (z >= 1 && (z as usize) <= table().len()).then_some(Element(z))
    }

    pub fn number(self) -> u8 {
        self.0
    }

    pub fn symbol(self) -> &'static str {
        table()[self.0 as usize - 1].symbol
    }

    /// Pauling electronegativity, `None` for the noble gases without one.
    pub fn electronegativity(self) -> Option<f64> {
        table()[self.0 as usize - 1].electronegativity
    }

    /// Sort key used for formula and site ordering: ascending
    /// electronegativity, elements without a value last, ties by symbol.
    pub fn formula_order(a: Element, b: Element) -> std::cmp::Ordering {
        let xa = a.electronegativity().unwrap_or(f64::INFINITY);
        let xb = b.electronegativity().unwrap_or(f64::INFINITY);
        xa.total_cmp(&xb).then_with(|| a.symbol().cmp(b.symbol()))
    }

    pub fn all() -> impl Iterator<Item = Element> {
        (1..=table().len() as u8).map(Element)
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl FromStr for Element {
    type Err = UnknownElement;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Element::from_symbol(s)
    }
}

impl Serialize for Element {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.symbol())
    }
}

impl<'de> Deserialize<'de> for Element {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Element::from_symbol(&s).map_err(serde::de::Error::custom)
    }
}
