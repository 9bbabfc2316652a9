//! Lattices, periodic distances, cell reduction and structure matching.

mod distance;
mod lattice;
mod matcher;
mod novelty;
mod primitive;

pub use distance::{min_image_distance, structural_validity, PeriodicFrame, MIN_PAIR_DISTANCE};
pub use lattice::{IntMatrix, Lattice, Niggli, NiggliError, NIGGLI_MAX_ITERATIONS};
pub use matcher::{
    dedupe, reduced_formula, reduced_match, structures_match, MatchTolerances, Reduced, ReducedFormula, PRIMITIVE_TOL_FRACTION,
};
pub use novelty::{parse_block, CorpusError, ReferenceIndex};
pub use primitive::{internal_translations, primitive_cell};

/// Niggli-reduce the cell given by `params`.
pub fn niggli_reduce(params: &crate::LatticeParams) -> Result<Niggli, NiggliError> {
    Lattice::from_params(params).niggli()
}
