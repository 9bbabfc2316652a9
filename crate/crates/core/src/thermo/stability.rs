use serde::{Deserialize, Serialize};

/// Upper bound (eV/atom) for the relaxed stability used by the S.S.U.N. rate.
pub const SSUN_THRESHOLD: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StabilityLabel {
    Stable,
    Metastable,
    Unstable,
}

impl StabilityLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            StabilityLabel::Stable => "stable",
            StabilityLabel::Metastable => "metastable",
            StabilityLabel::Unstable => "unstable",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    pub stable: f64,
    pub metastable: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { stable: 0.0, metastable: 0.08 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityRecord {
    pub e_hull: f64,
    pub label: StabilityLabel,
    pub thresholds: Thresholds,
}

impl StabilityRecord {
    pub fn new(e_hull: f64, thresholds: Thresholds) -> Self {
        StabilityRecord { e_hull, label: classify_stability(e_hull, &thresholds), thresholds }
    }
}

pub fn classify_stability(e_hull: f64, t: &Thresholds) -> StabilityLabel {
    if e_hull <= t.stable {
        StabilityLabel::Stable
    } else if e_hull <= t.metastable {
        StabilityLabel::Metastable
    } else {
        StabilityLabel::Unstable
    }
}

pub fn ssun_eligible(e_hull: f64) -> bool {
    e_hull <= SSUN_THRESHOLD
}
