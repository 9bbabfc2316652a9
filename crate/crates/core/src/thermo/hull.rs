use std::io::BufRead;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::composition::{parse_formula, Composition};
use super::simplex::{solve, LpOutcome};
use crate::element::Element;

/// Formation energy per atom (eV/atom) of one composition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HullEntry {
    #[serde(rename = "formula")]
    pub composition: Composition,
    pub energy_per_atom: f64,
}

impl HullEntry {
    pub fn new(composition: Composition, energy_per_atom: f64) -> Self {
        HullEntry { composition, energy_per_atom }
    }
}

#[derive(Debug, Error)]
pub enum HullError {
    #[error("element {0} lies outside the hull's element set")]
    ElementOutside(String),
    #[error("entry {0} has a non-finite energy")]
    BadEnergy(String),
    #[error("hull line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("reading hull entries: {0}")]
    Io(#[from] std::io::Error),
}

/// Lower convex envelope of formation energy over composition space.
#[derive(Debug, Clone)]
pub struct Hull {
    elements: Vec<Element>,
    entries: Vec<HullEntry>,
}

/// Entries plus a zero-energy endpoint for every element without an
/// elemental entry at or below zero.
pub fn build_hull(entries: Vec<HullEntry>, elements: &[Element]) -> Result<Hull, HullError> {
    let mut elements: Vec<Element> = elements.to_vec();
    elements.sort();
    elements.dedup();
    for e in &entries {
        if !e.energy_per_atom.is_finite() {
            return Err(HullError::BadEnergy(e.composition.to_string()));
        }
        if let Some(x) = e.composition.elements().find(|x| elements.binary_search(x).is_err()) {
            return Err(HullError::ElementOutside(x.symbol().into()));
        }
    }
    let mut entries = entries;
    for &el in &elements {
        let covered = entries
            .iter()
            .any(|e| e.composition.len() == 1 && e.composition.count(el) > 0.0 && e.energy_per_atom <= 0.0);
        if !covered {
            entries.push(HullEntry::new(Composition::new([(el, 1.0)]).expect("positive"), 0.0));
        }
    }
    Ok(Hull { elements, entries })
}

impl Hull {
    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn entries(&self) -> &[HullEntry] {
        &self.entries
    }

    /// `min Σ λ_j E_j` over mixtures of entries reproducing `composition`.
    pub fn hull_energy(&self, composition: &Composition) -> Result<f64, HullError> {
        let query: Vec<Element> = composition.elements().collect();
        if let Some(x) = query.iter().find(|x| self.elements.binary_search(x).is_err()) {
            return Err(HullError::ElementOutside(x.symbol().into()));
        }
        let usable: Vec<&HullEntry> =
            self.entries.iter().filter(|e| e.composition.elements().all(|x| query.contains(&x))).collect();
        let cost: Vec<f64> = usable.iter().map(|e| e.energy_per_atom).collect();
        let mut a: Vec<Vec<f64>> = Vec::with_capacity(query.len());
        let mut b: Vec<f64> = Vec::with_capacity(query.len());
        for &el in &query[1..] {
            a.push(usable.iter().map(|e| e.composition.fraction(el)).collect());
            b.push(composition.fraction(el));
        }
        a.push(vec![1.0; usable.len()]);
        b.push(1.0);
        match solve(&cost, &a, &b) {
            LpOutcome::Optimal { value, .. } => Ok(value),
            // endpoints for every element make the program feasible and bounded
            other => unreachable!("hull program ended as {other:?}"),
        }
    }

    pub fn energy_above_hull(&self, entry: &HullEntry) -> Result<f64, HullError> {
        Ok(entry.energy_per_atom - self.hull_energy(&entry.composition)?)
    }
}

pub fn energy_above_hull(entry: &HullEntry, hull: &Hull) -> Result<f64, HullError> {
    hull.energy_above_hull(entry)
}

/// Read JSONL rows `{"formula": ..., "energy_per_atom": ...}`; blank lines
/// are skipped.
pub fn read_hull_entries(reader: impl BufRead) -> Result<Vec<HullEntry>, HullError> {
    #[derive(Deserialize)]
    struct Row {
        formula: String,
        energy_per_atom: f64,
    }
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fail = |message: String| HullError::Line { line: i + 1, message };
        let row: Row = serde_json::from_str(&line).map_err(|e| fail(e.to_string()))?;
        let composition = parse_formula(&row.formula).map_err(|e| fail(e.to_string()))?;
        out.push(HullEntry::new(composition, row.energy_per_atom));
    }
    Ok(out)
}
