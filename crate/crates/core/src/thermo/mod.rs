//! Compositions, convex hulls, stability labels, charge neutrality and
//! classifier agreement.

mod agreement;
mod composition;
mod hull;
mod oxidation;
mod simplex;
mod stability;

pub use agreement::{agreement_stats, AgreementStats, LengthMismatch};
pub use composition::{parse_formula, Composition, FormulaError};
pub use hull::{build_hull, energy_above_hull, read_hull_entries, Hull, HullEntry, HullError};
pub use oxidation::{compositional_validity, MissingPolicy, OxidationTable, OxidationTableError};
pub use simplex::{solve as solve_lp, LpOutcome};
pub use stability::{classify_stability, ssun_eligible, StabilityLabel, StabilityRecord, Thresholds, SSUN_THRESHOLD};
