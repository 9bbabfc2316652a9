use serde::{Deserialize, Serialize};

use super::sample::Sample;
use crate::thermo::{ssun_eligible, StabilityLabel};

/// Evaluation counts for unconditional generation. Rates are percentages of
/// all generations; fractions are relative to the stable subset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SunReport {
    pub n_generated: usize,
    pub n_parsed: usize,
    pub n_scored: usize,
    pub n_stable: usize,
    pub n_metastable: usize,
    pub n_unstable: usize,
    pub n_unique: usize,
    pub n_novel: usize,
    pub n_sun: usize,
    pub parse_rate: f64,
    pub structural_validity_rate: f64,
    pub compositional_validity_rate: f64,
    pub stability_rate: f64,
    pub metastability_rate: f64,
    pub sun_rate: f64,
    pub stable_novel_fraction: f64,
    pub stable_unique_fraction: f64,
    pub warnings: Vec<String>,
}

/// Counts for one space-group-conditioned prompt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SsunReport {
    pub target_sg: u16,
    pub n_generated: usize,
    pub n_parsed: usize,
    /// Samples with `e_hull` at or below the relaxed S.S.U.N. threshold.
    pub n_metastable_or_better: usize,
    pub n_sg_match: usize,
    pub n_ssun: usize,
    pub sg_match_rate: f64,
    pub ssun_rate: f64,
    pub warnings: Vec<String>,
}

fn percent(n: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        100.0 * n as f64 / total as f64
    }
}

fn fraction(n: usize, total: usize) -> f64 {
    percent(n, total) / 100.0
}

fn count(samples: &[Sample], f: impl Fn(&Sample) -> bool) -> usize {
    samples.iter().filter(|s| f(s)).count()
}

pub fn sun_report(samples: &[Sample]) -> SunReport {
    let n = samples.len();
    let stable = |s: &Sample| s.stability == Some(StabilityLabel::Stable);
    let n_parsed = count(samples, Sample::is_parsed);
    let n_stable = count(samples, stable);
    let mut warnings = Vec::new();
    if n_parsed == 0 {
        warnings.push("no generation parsed; every rate is 0".to_string());
    }
    let n_sun = count(samples, |s| stable(s) && s.is_unique() && s.is_novel());
    SunReport {
        n_generated: n,
        n_parsed,
        n_scored: count(samples, |s| s.e_hull.is_some()),
        n_stable,
        n_metastable: count(samples, |s| s.stability == Some(StabilityLabel::Metastable)),
        n_unstable: count(samples, |s| s.stability == Some(StabilityLabel::Unstable)),
        n_unique: count(samples, Sample::is_unique),
        n_novel: count(samples, Sample::is_novel),
        n_sun,
        parse_rate: percent(n_parsed, n),
        structural_validity_rate: percent(count(samples, |s| s.structurally_valid == Some(true)), n),
        compositional_validity_rate: percent(count(samples, |s| s.compositionally_valid == Some(true)), n),
        stability_rate: percent(n_stable, n),
        metastability_rate: percent(count(samples, |s| s.stability == Some(StabilityLabel::Metastable)), n),
        sun_rate: percent(n_sun, n),
        stable_novel_fraction: fraction(count(samples, |s| stable(s) && s.is_novel()), n_stable),
        stable_unique_fraction: fraction(count(samples, |s| stable(s) && s.is_unique()), n_stable),
        warnings,
    }
}

pub fn ssun_report(samples: &[Sample], target_sg: u16) -> SsunReport {
    let n = samples.len();
    let relaxed = |s: &Sample| s.e_hull.is_some_and(ssun_eligible);
    let matches = |s: &Sample| s.detected_sg == Some(target_sg);
    let n_parsed = count(samples, Sample::is_parsed);
    let n_sg_match = count(samples, matches);
    let n_ssun = count(samples, |s| relaxed(s) && matches(s) && s.is_unique() && s.is_novel());
    let mut warnings = Vec::new();
    if n_parsed == 0 {
        warnings.push(format!("no generation for group {target_sg} parsed; every rate is 0"));
    }
    SsunReport {
        target_sg,
        n_generated: n,
        n_parsed,
        n_metastable_or_better: count(samples, relaxed),
        n_sg_match,
        n_ssun,
        sg_match_rate: percent(n_sg_match, n),
        ssun_rate: percent(n_ssun, n),
        warnings,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::thermo::{classify_stability, Thresholds};

    fn scored(id: u64, e_hull: f64, class: u64, novel: bool, sg: u16) -> Sample {
        let mut s = Sample::new(id, "p".into(), Some(sg), 1.0);
        s.parse_status = crate::rlip::ParseStatus::Ok;
        s.e_hull = Some(e_hull);
        s.stability = Some(classify_stability(e_hull, &Thresholds::default()));
        s.unique_class = Some(class);
        s.novel = Some(novel);
        s.detected_sg = Some(sg);
        s
    }

    #[test]
    fn sun_counts() {
        let mut v: Vec<Sample> = (0..10).map(|i| scored(i, 0.5, i, true, 1)).collect();
        v[0] = scored(0, -0.1, 0, true, 1);
        v[1] = scored(1, 0.0, 1, true, 1);
        v[2] = scored(2, -0.2, 2, false, 1);
        let r = sun_report(&v);
        assert_eq!((r.n_stable, r.n_sun), (3, 2));
        assert_eq!(r.sun_rate, 20.0);
        assert_eq!(r.stability_rate, 30.0);
        assert!((r.stable_novel_fraction - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn duplicates_collapse() {
        let v: Vec<Sample> = (0..6).map(|i| scored(i, -0.1, 0, true, 1)).collect();
        assert_eq!(sun_report(&v).n_sun, 1);
    }

    #[test]
    fn nothing_parsed() {
        let v: Vec<Sample> = (0..4).map(|i| Sample::new(i, "p".into(), None, 1.0)).collect();
        let r = sun_report(&v);
        assert_eq!((r.stability_rate, r.sun_rate, r.parse_rate), (0.0, 0.0, 0.0));
        assert_eq!(r.warnings.len(), 1);
        assert_eq!(sun_report(&[]).sun_rate, 0.0);
    }

    #[test]
    fn ssun_threshold_and_uniqueness() {
        let v = vec![
            scored(0, 0.09, 0, true, 15),
            scored(1, 0.12, 1, true, 15),
            scored(2, 0.01, 0, true, 15),
            scored(3, 0.0, 3, true, 2),
        ];
        let r = ssun_report(&v, 15);
        assert_eq!(r.n_ssun, 1);
        assert_eq!(r.n_metastable_or_better, 3);
        assert_eq!(r.n_sg_match, 3);
        assert_eq!(r.ssun_rate, 25.0);
    }
}
