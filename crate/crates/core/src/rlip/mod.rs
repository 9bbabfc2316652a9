//! Preference pairs for DPO, the reference loss, evaluation reports and the
//! sample/score/pair round driven by external sampler and scorer commands.
//!
//! Both plugins speak JSONL over standard streams. The sampler reads
//! `{"id", "prompt", "temperature", "attempt"}` rows and answers
//! `{"id", "text"}`; the scorer reads `{"id", "wyckoff_text"}` and answers
//! `{"id", "energy_per_atom"}`.

mod loss;
mod pairs;
pub mod plugin;
mod report;
mod round;
mod sample;
mod schedule;

pub use loss::{dpo_loss, dpo_margin, softplus, LogProbPair, LossError};
pub use pairs::{novelty_pairs, spacegroup_pairs, tiered_pairs, PairMode, PairSet, PreferencePair, Tier};
pub use report::{ssun_report, sun_report, SsunReport, SunReport};
pub use round::{
    build_pairs, round_metrics, run_round, ReferencePolicy, RoundConfig, RoundError, RoundManifest, RoundMetrics,
    RoundStatus, DEFAULT_RMAX, DEFAULT_SPACEGROUPS, MANIFEST_FILE, METRICS_FILE, PAIRS_FILE, SAMPLES_FILE,
};
pub use sample::{ParseStatus, Sample};
pub use schedule::{temperature, TemperatureSchedule};
