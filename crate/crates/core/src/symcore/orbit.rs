use thiserror::Error;

use super::database::SpaceGroup;
use super::solve::max_wrapped_distance;
use crate::crystal::wrap01;

/// Deduplication tolerance used by [`expand_orbit`] (fractional, max-norm).
pub const EPS_ORBIT: f64 = 1e-6;

/// Default symmetry tolerance (fractional).
pub const DEFAULT_SYM_TOL: f64 = 0.01;

/// The orbit `{g x mod 1 : g in G}` of `generator`, in op order (the
/// identity is the first op of every shipped group, so the generator comes
/// first). Points closer than [`EPS_ORBIT`] are merged.
pub fn expand_orbit(group: &SpaceGroup, generator: [f64; 3]) -> Vec<[f64; 3]> {
    expand_orbit_with_tol(group, generator, EPS_ORBIT)
}

pub fn expand_orbit_with_tol(group: &SpaceGroup, generator: [f64; 3], tol: f64) -> Vec<[f64; 3]> {
    let mut orbit: Vec<[f64; 3]> = Vec::with_capacity(group.ops.len());
    for op in &group.ops {
        let p = op.apply(generator).map(wrap01);
        if !orbit.iter().any(|q| max_wrapped_distance(*q, p) <= tol) {
            orbit.push(p);
        }
    }
    orbit
}

#[derive(Debug, Clone, PartialEq)]
pub struct WyckoffAssignment {
    pub letter: char,
    pub multiplicity: usize,
    /// Orbit member solving the representative expression, projected onto
    /// it and reduced to `[0, 1)`.
    pub generator: [f64; 3],
}

impl WyckoffAssignment {
    pub fn label(&self) -> String {
        format!("{}{}", self.multiplicity, self.letter)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("no Wyckoff position of {symbol} with multiplicity {multiplicity} matches the orbit")]
pub struct AssignError {
    pub symbol: String,
    pub multiplicity: usize,
}

/// Label an orbit with its Wyckoff position.
///
/// Candidates are the positions whose multiplicity equals the orbit size,
/// tried from the most constrained (fewest free parameters) upward. The
/// generator is the first orbit member, in the given order, that solves the
/// candidate's representative expression within `tol`.
pub fn assign_wyckoff(group: &SpaceGroup, orbit: &[[f64; 3]], tol: f64) -> Result<WyckoffAssignment, AssignError> {
    let mut candidates: Vec<_> =
        group.wyckoff_positions.iter().filter(|w| w.multiplicity == orbit.len()).collect();
    candidates.sort_by_key(|w| w.free_variable_count);
    for w in candidates {
        if let Some(generator) = orbit.iter().find_map(|p| w.solve(*p, tol)) {
            return Ok(WyckoffAssignment { letter: w.letter, multiplicity: w.multiplicity, generator });
        }
    }
    Err(AssignError { symbol: group.symbol.clone(), multiplicity: orbit.len() })
}
