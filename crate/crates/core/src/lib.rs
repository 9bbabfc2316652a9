//! Crystal toolkit for Wyckoff-text crystal generation pipelines.
//!
//! The crate is split along the pipeline:
//!
//! * [`symcore`]: space-group database, exact coordinate triplets, orbit
//!   expansion, Wyckoff assignment and tolerance-based space-group detection.
//! * [`codec`]: the Wyckoff and plain-coordinate text blocks and the
//!   generation prompts.
//! * [`geometry`]: lattices, periodic distances, validity, Niggli and
//!   primitive reduction, structure matching, uniqueness and novelty.
//! * [`thermo`]: compositions, convex hulls, energy above hull, stability
//!   labels, charge neutrality and classifier agreement.
//! * [`rlip`]: preference-pair construction, the DPO loss, evaluation
//!   reports and round orchestration over external sampler/scorer commands.
//!
//! Data-parallel work goes through [`Exec`]; with the `parallel` feature
//! disabled every path runs sequentially and produces identical output.

pub mod codec;
mod crystal;
pub mod element;
mod exec;
pub mod geometry;
pub mod rlip;
pub mod symcore;
pub mod thermo;

pub use crystal::{Crystal, CrystalError, LatticeParams, Site};
pub use element::Element;
pub use exec::Exec;
