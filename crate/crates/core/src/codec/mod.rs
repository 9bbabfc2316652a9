//! Text encodings of crystals and the generation prompts.
//!
//! A Wyckoff block lists the asymmetric unit:
//!
//! ```text
//! Ti4Ni4Sn4
//! Spacegroup: F-43m
//! abc: 5.89 5.89 5.89
//! angles: 90.00 90.00 90.00
//! Sites (12)
//! Ti 0.500 0.500 0.500 4b
//! Ni 0.750 0.750 0.750 4d
//! Sn 0.000 0.000 0.000 4a
//! ```
//!
//! The coordinate block has the same layout without the `Spacegroup:` line
//! and the labels, with one line per atom. Parsers split on runs of
//! whitespace; encoders emit single spaces.

mod coords;
pub mod decimal;
mod lex;
mod prompt;
mod wyckoff;

use thiserror::Error;

use crate::CrystalError;

pub use coords::{encode_coords, parse_coords};
pub use prompt::{render_prompt, Prompt, PromptError, PromptKind};
pub use wyckoff::{
    encode_wyckoff, parse_wyckoff, reconstruct, wyckoff_record, EncodeError, ReconstructError, WyckoffRecord,
    WyckoffSite, SNAP_TOL,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ErrorKind {
    Lexical,
    Semantic,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Lexical { line: usize, message: String },
    #[error(transparent)]
    Semantic(#[from] SemanticError),
}

impl ParseError {
    pub fn kind(&self) -> ErrorKind {
        match self {
            ParseError::Lexical { .. } => ErrorKind::Lexical,
            ParseError::Semantic(_) => ErrorKind::Semantic,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SemanticError {
    #[error("formula declares {formula} {element} but the sites hold {sites}")]
    FormulaMismatch { element: String, formula: usize, sites: usize },
    #[error("Wyckoff position {label} does not exist in {spacegroup}")]
    UnknownLabel { label: String, spacegroup: String },
    #[error("header declares {declared} sites but the listed sites hold {actual}")]
    SiteCountMismatch { declared: usize, actual: usize },
    #[error("unknown space group symbol '{0}'")]
    UnknownSpacegroup(String),
    #[error("invalid lattice: {0}")]
    InvalidLattice(#[from] CrystalError),
}

/// Compare the declared formula against per-element site totals.
fn check_formula(
    formula: &[(crate::Element, usize)],
    totals: &[(crate::Element, usize)],
) -> Result<(), SemanticError> {
    for (el, n) in formula {
        let have = totals.iter().find(|(e, _)| e == el).map_or(0, |(_, m)| *m);
        if have != *n {
            return Err(SemanticError::FormulaMismatch { element: el.symbol().into(), formula: *n, sites: have });
        }
    }
    for (el, m) in totals {
        if !formula.iter().any(|(e, _)| e == el) {
            return Err(SemanticError::FormulaMismatch { element: el.symbol().into(), formula: 0, sites: *m });
        }
    }
    Ok(())
}

fn add_count(totals: &mut Vec<(crate::Element, usize)>, el: crate::Element, n: usize) {
    match totals.iter_mut().find(|(e, _)| *e == el) {
        Some((_, m)) => *m += n,
        None => totals.push((el, n)),
    }
}

fn formula_line(formula: &[(crate::Element, usize)]) -> String {
    formula.iter().map(|(e, n)| format!("{}{n}", e.symbol())).collect()
}

fn lattice_lines(l: &crate::LatticeParams) -> String {
    use decimal::fixed;
    format!(
        "abc: {} {} {}\nangles: {} {} {}\n",
        fixed(l.a, 2),
        fixed(l.b, 2),
        fixed(l.c, 2),
        fixed(l.alpha, 2),
        fixed(l.beta, 2),
        fixed(l.gamma, 2)
    )
}
