//! Space groups, Wyckoff positions and symmetry detection.

mod database;
mod detect;
mod orbit;
mod solve;
mod triplet;

pub use database::{
    number_to_symbol, symbol_to_number, CrystalSystem, DbError, IntMatrix, LookupError, SpaceGroup, SpaceGroupDb,
    SymmetryOp, WyckoffPosition,
};
pub use detect::{detect_spacegroup, Detection, MAX_SHIFT_CANDIDATES, METRIC_ANGLE_TOL, METRIC_LENGTH_TOL};
pub use orbit::{
    assign_wyckoff, expand_orbit, expand_orbit_with_tol, AssignError, WyckoffAssignment, DEFAULT_SYM_TOL, EPS_ORBIT,
};
pub use triplet::{parse_triplet, AffineMap, TripletError, Q};

pub(crate) use solve::max_wrapped_distance;
