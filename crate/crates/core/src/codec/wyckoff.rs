use std::cmp::Ordering;

use thiserror::Error;

use super::decimal::{coordinate, round_coordinate};
use super::lex::{self, Lines};
use super::{add_count, check_formula, formula_line, lattice_lines, ParseError, SemanticError};
use crate::element::Element;
use crate::symcore::{assign_wyckoff, expand_orbit, expand_orbit_with_tol, max_wrapped_distance, AssignError, SpaceGroup, SpaceGroupDb};
use crate::{Crystal, CrystalError, LatticeParams, Site};

/// How far a listed site may sit from its declared Wyckoff position.
/// Three printed decimals put special coordinates such as 1/3 up to 5e-4
/// off, and dependent expressions like `2x` double that.
pub const SNAP_TOL: f64 = 2e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct WyckoffSite {
    pub element: Element,
    pub frac: [f64; 3],
    pub multiplicity: usize,
    pub letter: char,
}

impl WyckoffSite {
    pub fn label(&self) -> String {
        format!("{}{}", self.multiplicity, self.letter)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WyckoffRecord {
    pub formula: Vec<(Element, usize)>,
    pub spacegroup: u16,
    pub lattice: LatticeParams,
    pub total_atoms: usize,
    pub sites: Vec<WyckoffSite>,
}

impl WyckoffRecord {
    pub fn symbol(&self) -> &'static str {
        SpaceGroupDb::standard().get(self.spacegroup).map_or("?", |g| g.symbol.as_str())
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{}\nSpacegroup: {}\n", formula_line(&self.formula), self.symbol());
        out.push_str(&lattice_lines(&self.lattice));
        out.push_str(&format!("Sites ({})\n", self.total_atoms));
        for s in &self.sites {
            let [x, y, z] = s.frac.map(coordinate);
            out.push_str(&format!("{} {x} {y} {z} {}\n", s.element.symbol(), s.label()));
        }
        out
    }
}

impl std::fmt::Display for WyckoffRecord {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.to_text())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EncodeError {
    #[error("cannot encode a crystal without atoms")]
    Empty,
    #[error("atom {0} has no symmetry partner for every operation of {1}")]
    NotClosed(usize, String),
    #[error(transparent)]
    Assign(#[from] AssignError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReconstructError {
    #[error("space group {0} does not exist")]
    UnknownSpacegroup(u16),
    #[error("site {site}: Wyckoff position {label} does not exist in the group")]
    UnknownLabel { site: usize, label: String },
    #[error("site {site}: coordinates do not lie on Wyckoff position {label}")]
    OffPosition { site: usize, label: String },
    #[error("site {site}: orbit has {orbit} points, which contradicts {label}")]
    MultiplicityMismatch { site: usize, label: String, orbit: usize },
    #[error(transparent)]
    Crystal(#[from] CrystalError),
}

/// Detect the space group, split the atoms into orbits and label each orbit.
pub fn wyckoff_record(crystal: &Crystal, sym_tol: f64) -> Result<WyckoffRecord, EncodeError> {
    if crystal.is_empty() {
        return Err(EncodeError::Empty);
    }
    let db = SpaceGroupDb::standard();
    let detection = db.detect(crystal, sym_tol);
    let group = db.get(detection.number).expect("detected group exists");
    let shift = detection.origin_shift;
    let points: Vec<[f64; 3]> =
        crystal.sites.iter().map(|s| [0, 1, 2].map(|k| s.frac[k] - shift[k])).collect();

    let mut used = vec![false; points.len()];
    let mut sites = Vec::new();
    for i in 0..points.len() {
        if used[i] {
            continue;
        }
        let element = crystal.sites[i].element;
        let mut members = Vec::new();
        for target in expand_orbit_with_tol(group, points[i], sym_tol) {
            let best = (0..points.len())
                .filter(|&j| !used[j] && crystal.sites[j].element == element)
                .map(|j| (max_wrapped_distance(points[j], target), j))
                .filter(|(d, _)| *d <= sym_tol)
                .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let Some((_, j)) = best else {
                return Err(EncodeError::NotClosed(i, group.symbol.clone()));
            };
            used[j] = true;
            members.push(j);
        }
        members.sort_unstable();
        let orbit: Vec<[f64; 3]> = members.iter().map(|&j| points[j]).collect();
        let a = assign_wyckoff(group, &orbit, sym_tol)?;
        sites.push(WyckoffSite { element, frac: a.generator, multiplicity: a.multiplicity, letter: a.letter });
    }

    sites.sort_by(|a, b| {
        Element::formula_order(a.element, b.element)
            .then(b.multiplicity.cmp(&a.multiplicity))
            .then(a.letter.cmp(&b.letter))
            .then_with(|| compare_rounded(a.frac, b.frac))
    });
    let mut formula = Vec::new();
    for s in &sites {
        add_count(&mut formula, s.element, s.multiplicity);
    }
    Ok(WyckoffRecord {
        formula,
        spacegroup: group.number,
        lattice: crystal.lattice,
        total_atoms: crystal.len(),
        sites,
    })
}

fn compare_rounded(a: [f64; 3], b: [f64; 3]) -> Ordering {
    (0..3)
        .map(|k| round_coordinate(a[k]).total_cmp(&round_coordinate(b[k])))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Encode `crystal` as a Wyckoff block.
pub fn encode_wyckoff(crystal: &Crystal, sym_tol: f64) -> Result<String, EncodeError> {
    Ok(wyckoff_record(crystal, sym_tol)?.to_text())
}

pub fn parse_wyckoff(text: &str) -> Result<WyckoffRecord, ParseError> {
    let mut lines = Lines::new(text);
    let formula = lex::formula(&mut lines)?;
    let symbol = lex::spacegroup_symbol(&mut lines)?;
    let lattice = lex::lattice(&mut lines)?;
    let total_atoms = lex::site_total(&mut lines)?;
    let mut sites = Vec::new();
    for line in lines.remaining() {
        let line = line?;
        if line.tokens.len() != 5 {
            return Err(line.error(format!("site line needs 5 fields, found {}", line.tokens.len())));
        }
        let element = lex::element(&line, line.tokens[0])?;
        let frac = lex::coordinates(&line, &line.tokens[1..4])?;
        let label = line.tokens[4];
        let letter = label.chars().last().filter(char::is_ascii_alphabetic);
        let Some(letter) = letter else {
            return Err(line.error(format!("invalid Wyckoff label '{label}'")));
        };
        let multiplicity = lex::count(&line, &label[..label.len() - 1], "multiplicity")?;
        sites.push(WyckoffSite { element, frac, multiplicity, letter });
    }

    let group = SpaceGroupDb::standard()
        .by_symbol(symbol)
        .ok_or_else(|| SemanticError::UnknownSpacegroup(symbol.to_string()))?;
    lattice.validate().map_err(SemanticError::from)?;
    let actual = sites.iter().map(|s| s.multiplicity).sum();
    if actual != total_atoms {
        return Err(SemanticError::SiteCountMismatch { declared: total_atoms, actual }.into());
    }
    if let Some(s) = sites.iter().find(|s| group.wyckoff(s.multiplicity, s.letter).is_none()) {
        return Err(SemanticError::UnknownLabel { label: s.label(), spacegroup: group.symbol.clone() }.into());
    }
    let mut totals = Vec::new();
    for s in &sites {
        add_count(&mut totals, s.element, s.multiplicity);
    }
    check_formula(&formula, &totals)?;
    Ok(WyckoffRecord { formula, spacegroup: group.number, lattice, total_atoms, sites })
}

/// Expand every site's orbit and concatenate them in record order.
///
/// Each site is first moved onto its declared position (within
/// [`SNAP_TOL`]) so that rounded special coordinates produce exact orbits.
pub fn reconstruct(record: &WyckoffRecord) -> Result<Crystal, ReconstructError> {
    let group = SpaceGroupDb::standard()
        .get(record.spacegroup)
        .ok_or(ReconstructError::UnknownSpacegroup(record.spacegroup))?;
    let mut atoms = Vec::with_capacity(record.total_atoms);
    for (i, site) in record.sites.iter().enumerate() {
        let orbit = site_orbit(group, i, site)?;
        atoms.extend(orbit.into_iter().map(|p| Site::new(site.element, p)));
    }
    Ok(Crystal::new(record.lattice, atoms)?)
}

fn site_orbit(group: &SpaceGroup, index: usize, site: &WyckoffSite) -> Result<Vec<[f64; 3]>, ReconstructError> {
    let label = site.label();
    let w = group
        .wyckoff(site.multiplicity, site.letter)
        .ok_or_else(|| ReconstructError::UnknownLabel { site: index, label: label.clone() })?;
    let snapped = group
        .ops
        .iter()
        .find_map(|op| w.solve(op.apply(site.frac), SNAP_TOL))
        .ok_or_else(|| ReconstructError::OffPosition { site: index, label: label.clone() })?;
    let mut orbit = expand_orbit(group, snapped);
    if orbit.len() != site.multiplicity {
        return Err(ReconstructError::MultiplicityMismatch { site: index, label, orbit: orbit.len() });
    }
    let nearest = (0..orbit.len())
        .min_by(|&a, &b| {
            max_wrapped_distance(orbit[a], site.frac).total_cmp(&max_wrapped_distance(orbit[b], site.frac))
        })
        .unwrap_or(0);
    orbit.rotate_left(nearest);
    Ok(orbit)
}
