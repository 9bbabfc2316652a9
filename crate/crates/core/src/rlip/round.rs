use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::pairs::{novelty_pairs, spacegroup_pairs, tiered_pairs, PairMode, PairSet, Tier};
use super::plugin::{from_jsonl, run_plugin, to_jsonl, SampleRequest, SampleResponse, ScoreRequest, ScoreResponse};
use super::report::{ssun_report, sun_report, SsunReport, SunReport};
use super::sample::{ParseStatus, Sample};
use super::schedule::TemperatureSchedule;
use crate::codec::{parse_wyckoff, reconstruct, render_prompt, ErrorKind, PromptKind, WyckoffRecord};
use crate::geometry::{dedupe, structural_validity, MatchTolerances, ReferenceIndex};
use crate::symcore::detect_spacegroup;
use crate::thermo::{
    build_hull, classify_stability, compositional_validity, read_hull_entries, Composition, MissingPolicy,
    OxidationTable, Thresholds,
};
use crate::{Crystal, Element, Exec};

/// One group per crystal system.
pub const DEFAULT_SPACEGROUPS: [u16; 7] = [1, 15, 38, 119, 143, 194, 216];
pub const DEFAULT_RMAX: u32 = 5;

/// Which checkpoint serves as the frozen reference model for the DPO step
/// that consumes this round's pairs. Recorded only.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferencePolicy {
    #[default]
    Previous,
    Initial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RoundConfig {
    pub sampler: String,
    pub scorer: String,
    pub seed: u64,
    pub temperature: TemperatureSchedule,
    pub rmax: u32,
    pub pair_mode: PairMode,
    pub unconditional: usize,
    pub per_spacegroup: usize,
    pub spacegroups: Vec<u16>,
    pub hull: PathBuf,
    pub novelty_corpus: Option<PathBuf>,
    pub sym_tol: f64,
    pub match_tolerances: MatchTolerances,
    pub thresholds: Thresholds,
    pub reference_policy: ReferencePolicy,
}

impl Default for RoundConfig {
    fn default() -> Self {
        RoundConfig {
            sampler: String::new(),
            scorer: String::new(),
            seed: 0,
            temperature: TemperatureSchedule::default(),
            rmax: DEFAULT_RMAX,
            pair_mode: PairMode::Tiered,
            unconditional: 10_000,
            per_spacegroup: 1_000,
            spacegroups: DEFAULT_SPACEGROUPS.to_vec(),
            hull: PathBuf::new(),
            novelty_corpus: None,
            sym_tol: 0.01,
            match_tolerances: MatchTolerances::default(),
            thresholds: Thresholds::default(),
            reference_policy: ReferencePolicy::Previous,
        }
    }
}

impl RoundConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.sampler.trim().is_empty() {
            return Err("no sampler command configured".into());
        }
        if self.scorer.trim().is_empty() {
            return Err("no scorer command configured".into());
        }
        if self.hull.as_os_str().is_empty() {
            return Err("no reference hull file configured".into());
        }
        if !(self.sym_tol > 0.0) {
            return Err(format!("sym_tol must be positive, got {}", self.sym_tol));
        }
        let t = &self.match_tolerances;
        if !(t.ltol > 0.0 && t.stol > 0.0 && t.angle_tol > 0.0) {
            return Err("match tolerances must be positive".into());
        }
        if !(self.thresholds.stable <= self.thresholds.metastable) {
            return Err("the stable threshold exceeds the metastable one".into());
        }
        if self.unconditional + self.per_spacegroup * self.spacegroups.len() == 0 {
            return Err("the prompt mix is empty".into());
        }
        let mut seen = BTreeSet::new();
        for &g in &self.spacegroups {
            if !(1..=230).contains(&g) {
                return Err(format!("space group {g} does not exist"));
            }
            if !seen.insert(g) {
                return Err(format!("space group {g} listed twice"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoundStatus {
    Completed,
    Aborted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundManifest {
    pub status: RoundStatus,
    pub reason: Option<String>,
    pub iteration: u32,
    pub temperature: f64,
    pub seed: u64,
    pub reference_checkpoint: String,
    pub prompts: usize,
    pub sampler_requests: usize,
    pub parse_counts: BTreeMap<ParseStatus, usize>,
    pub stability_counts: BTreeMap<String, usize>,
    pub pair_counts: BTreeMap<Tier, usize>,
    pub warnings: Vec<String>,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
    pub config: RoundConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundMetrics {
    pub sun: SunReport,
    pub ssun: Vec<SsunReport>,
}

#[derive(Debug, Error)]
pub enum RoundError {
    #[error("invalid round configuration: {0}")]
    Config(String),
    #[error("{0}")]
    Input(String),
    #[error("writing round outputs: {0}")]
    Io(#[from] std::io::Error),
    #[error("round aborted: {}", .0.reason.as_deref().unwrap_or("unknown"))]
    Aborted(Box<RoundManifest>),
}

pub const SAMPLES_FILE: &str = "samples.jsonl";
pub const PAIRS_FILE: &str = "pairs.jsonl";
pub const METRICS_FILE: &str = "metrics.json";
pub const MANIFEST_FILE: &str = "manifest.json";

fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn group_seed(seed: u64, target: Option<u16>) -> u64 {
    seed.wrapping_add(u64::from(target.unwrap_or(0)).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn by_target(samples: &[Sample]) -> BTreeMap<Option<u16>, Vec<Sample>> {
    let mut groups: BTreeMap<Option<u16>, Vec<Sample>> = BTreeMap::new();
    for s in samples {
        groups.entry(s.target_sg).or_default().push(s.clone());
    }
    groups
}

/// All pairs of a round: stability tiers and novelty over the unconditional
/// prompt, space-group pairs per conditioned prompt.
pub fn build_pairs(samples: &[Sample], seed: u64, mode: PairMode) -> PairSet {
    let mut out = PairSet::default();
    for (target, group) in by_target(samples) {
        let seed = group_seed(seed, target);
        match target {
            None => {
                out.extend(tiered_pairs(&group, seed, mode));
                out.extend(novelty_pairs(&group, seed));
            }
            Some(sg) => out.extend(spacegroup_pairs(&group, sg, seed)),
        }
    }
    out
}

/// S.U.N. over the unconditional samples and S.S.U.N. per target group.
pub fn round_metrics(samples: &[Sample], spacegroups: &[u16]) -> RoundMetrics {
    let groups = by_target(samples);
    let sun = sun_report(groups.get(&None).map(Vec::as_slice).unwrap_or(&[]));
    let ssun = spacegroups
        .iter()
        .map(|&g| ssun_report(groups.get(&Some(g)).map(Vec::as_slice).unwrap_or(&[]), g))
        .collect();
    RoundMetrics { sun, ssun }
}

fn interpret(text: &str) -> Result<(WyckoffRecord, Crystal), (ParseStatus, String)> {
    let record = parse_wyckoff(text).map_err(|e| {
        let status = match e.kind() {
            ErrorKind::Lexical => ParseStatus::LexicalError,
            ErrorKind::Semantic => ParseStatus::SemanticError,
        };
        (status, e.to_string())
    })?;
    let crystal = reconstruct(&record).map_err(|e| (ParseStatus::SemanticError, e.to_string()))?;
    Ok((record, crystal))
}

struct Round<'a> {
    out_dir: &'a Path,
    manifest: RoundManifest,
}

impl Round<'_> {
    fn abort(mut self, reason: String) -> RoundError {
        self.manifest.status = RoundStatus::Aborted;
        self.manifest.reason = Some(reason);
        if let Err(e) = write_json(&self.out_dir.join(MANIFEST_FILE), &self.manifest) {
            return RoundError::Io(e);
        }
        RoundError::Aborted(Box::new(self.manifest))
    }

    fn count(&mut self, samples: &[Sample]) {
        let m = &mut self.manifest;
        m.parse_counts = [ParseStatus::Ok, ParseStatus::LexicalError, ParseStatus::SemanticError]
            .into_iter()
            .map(|p| (p, samples.iter().filter(|s| s.parse_status == p).count()))
            .collect();
        m.stability_counts.clear();
        for s in samples {
            let key = s.stability.map_or("unscored", |l| l.as_str());
            *m.stability_counts.entry(key.to_string()).or_default() += 1;
        }
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> std::io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("plain data serializes");
    text.push('\n');
    fs::write(path, text)
}

fn read_input(path: &Path, what: &str) -> Result<Vec<u8>, RoundError> {
    fs::read(path).map_err(|e| RoundError::Input(format!("reading {what} {}: {e}", path.display())))
}

/// Sample, parse with resampling, score, label, deduplicate, build pairs
/// and write `samples.jsonl`, `pairs.jsonl`, `metrics.json` and
/// `manifest.json` into `out_dir`.
pub fn run_round(config: &RoundConfig, iteration: u32, out_dir: &Path, exec: Exec) -> Result<RoundManifest, RoundError> {
    config.validate().map_err(RoundError::Config)?;
    let temperature = config.temperature.at(iteration);

    let mut prompts = Vec::new();
    let unconditional = render_prompt(PromptKind::Unconditional, None).expect("valid arguments");
    prompts.extend(std::iter::repeat_n(unconditional, config.unconditional));
    for &g in &config.spacegroups {
        let p = render_prompt(PromptKind::Spacegroup, Some(g.into())).map_err(|e| RoundError::Config(e.to_string()))?;
        prompts.extend(std::iter::repeat_n(p, config.per_spacegroup));
    }
    let mut samples: Vec<Sample> = prompts
        .iter()
        .enumerate()
        .map(|(i, p)| Sample::new(i as u64, p.text.clone(), p.spacegroup, temperature))
        .collect();
    let n = samples.len();

    let hull_bytes = read_input(&config.hull, "hull file")?;
    let hull_entries = read_hull_entries(&hull_bytes[..]).map_err(|e| RoundError::Input(e.to_string()))?;
    let corpus_bytes = match &config.novelty_corpus {
        Some(p) => Some(read_input(p, "novelty corpus")?),
        None => None,
    };

    fs::create_dir_all(out_dir)?;
    let reference_checkpoint = match (config.reference_policy, iteration) {
        (ReferencePolicy::Previous, i) if i > 0 => format!("iteration-{}", i - 1),
        _ => "initial".to_string(),
    };
    let mut round = Round {
        out_dir,
        manifest: RoundManifest {
            status: RoundStatus::Completed,
            reason: None,
            iteration,
            temperature,
            seed: config.seed,
            reference_checkpoint,
            prompts: n,
            sampler_requests: 0,
            parse_counts: BTreeMap::new(),
            stability_counts: BTreeMap::new(),
            pair_counts: BTreeMap::new(),
            warnings: Vec::new(),
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
            config: config.clone(),
        },
    };
    round.manifest.inputs.insert("hull".into(), digest(&hull_bytes));
    if let Some(b) = &corpus_bytes {
        round.manifest.inputs.insert("novelty_corpus".into(), digest(b));
    }

    // sampling with resampling of unparsable generations
    let mut parsed: Vec<Option<(WyckoffRecord, Crystal)>> = vec![None; n];
    let mut pending: Vec<usize> = (0..n).collect();
    let mut sampler_log = Sha256::new();
    for attempt in 0..=config.rmax {
        if pending.is_empty() {
            break;
        }
        let requests: Vec<SampleRequest> = pending
            .iter()
            .map(|&i| SampleRequest { id: samples[i].id, prompt: samples[i].prompt.clone(), temperature, attempt })
            .collect();
        let request_bytes = to_jsonl(&requests);
        if attempt == 0 {
            round.manifest.inputs.insert("prompts".into(), digest(&request_bytes));
        }
        round.manifest.sampler_requests += requests.len();
        let output = match run_plugin(&config.sampler, &request_bytes) {
            Ok(o) => o,
            Err(e) => {
                round.count(&samples);
                return Err(round.abort(format!("sampler failed: {e}")));
            }
        };
        sampler_log.update(&output);
        let responses: Vec<SampleResponse> = match from_jsonl(&output) {
            Ok(r) => r,
            Err((line, msg)) => return Err(round.abort(format!("sampler output line {line}: {msg}"))),
        };
        if responses.is_empty() {
            return Err(round.abort(format!("sampler returned no generations for attempt {attempt}")));
        }
        let mut texts: HashMap<u64, String> = HashMap::new();
        for r in responses {
            if !requests.iter().any(|q| q.id == r.id) {
                return Err(round.abort(format!("sampler answered unrequested id {}", r.id)));
            }
            if texts.insert(r.id, r.text).is_some() {
                return Err(round.abort(format!("sampler answered id {} twice", r.id)));
            }
        }
        for &i in &pending {
            let s = &mut samples[i];
            s.attempts += 1;
            s.text = texts.remove(&s.id).unwrap_or_default();
        }
        let results = exec.map(&pending, |&i| interpret(&samples[i].text));
        let mut still = Vec::new();
        for (&i, result) in pending.iter().zip(results) {
            let s = &mut samples[i];
            match result {
                Ok(ok) => {
                    s.parse_status = ParseStatus::Ok;
                    s.parse_error = None;
                    parsed[i] = Some(ok);
                }
                Err((status, msg)) => {
                    s.parse_status = status;
                    s.parse_error = Some(msg);
                    still.push(i);
                }
            }
        }
        pending = still;
    }
    round.manifest.inputs.insert("sampler_output".into(), hex::encode(sampler_log.finalize()));
    round.count(&samples);
    if pending.len() * 2 > n {
        return Err(round.abort(format!(
            "{} of {n} prompts still unparsable after {} resamples",
            pending.len(),
            config.rmax
        )));
    }

    // per-structure checks
    let ok: Vec<usize> = (0..n).filter(|&i| parsed[i].is_some()).collect();
    let table = OxidationTable::standard();
    let checks = exec.map(&ok, |&i| {
        let (record, crystal) = parsed[i].as_ref().expect("parsed");
        let composition = Composition::of_crystal(crystal).ok();
        (
            record.to_text(),
            structural_validity(crystal),
            composition.as_ref().is_some_and(|c| compositional_validity(c, table, MissingPolicy::Strict)),
            detect_spacegroup(crystal, config.sym_tol),
            composition,
        )
    });
    let mut compositions: HashMap<usize, Composition> = HashMap::new();
    for (&i, (text, structural, chemical, sg, composition)) in ok.iter().zip(checks) {
        let s = &mut samples[i];
        s.record = Some(text);
        s.structurally_valid = Some(structural);
        s.compositionally_valid = Some(chemical);
        s.detected_sg = Some(sg);
        if let Some(c) = composition {
            compositions.insert(i, c);
        }
    }

    // scoring
    let requests: Vec<ScoreRequest> =
        ok.iter().map(|&i| ScoreRequest { id: samples[i].id, wyckoff_text: samples[i].text.clone() }).collect();
    let output = match run_plugin(&config.scorer, &to_jsonl(&requests)) {
        Ok(o) => o,
        Err(e) => return Err(round.abort(format!("scorer failed: {e}"))),
    };
    round.manifest.inputs.insert("scorer_output".into(), digest(&output));
    let scores: Vec<ScoreResponse> = match from_jsonl(&output) {
        Ok(r) => r,
        Err((line, msg)) => return Err(round.abort(format!("scorer output line {line}: {msg}"))),
    };
    let mut energies: HashMap<u64, f64> = HashMap::new();
    for r in scores {
        if !r.energy_per_atom.is_finite() {
            return Err(round.abort(format!("scorer gave id {} a non-finite energy", r.id)));
        }
        if !requests.iter().any(|q| q.id == r.id) {
            return Err(round.abort(format!("scorer answered unrequested id {}", r.id)));
        }
        if energies.insert(r.id, r.energy_per_atom).is_some() {
            return Err(round.abort(format!("scorer answered id {} twice", r.id)));
        }
    }
    if let Some(q) = requests.iter().find(|q| !energies.contains_key(&q.id)) {
        return Err(round.abort(format!("scorer gave no energy for id {}", q.id)));
    }

    let mut elements: BTreeSet<Element> = hull_entries.iter().flat_map(|e| e.composition.elements()).collect();
    elements.extend(compositions.values().flat_map(|c| c.elements()));
    let elements: Vec<Element> = elements.into_iter().collect();
    let hull = build_hull(hull_entries, &elements).map_err(|e| RoundError::Input(e.to_string()))?;
    let scored: Vec<usize> = ok.iter().copied().filter(|i| compositions.contains_key(i)).collect();
    let hull_energies = exec.map(&scored, |i| hull.hull_energy(&compositions[i]).expect("elements are in the hull"));
    for (&i, h) in scored.iter().zip(hull_energies) {
        let s = &mut samples[i];
        let energy = energies[&s.id];
        let e_hull = energy - h;
        s.energy_per_atom = Some(energy);
        s.e_hull = Some(e_hull);
        s.stability = Some(classify_stability(e_hull, &config.thresholds));
    }

    // uniqueness within each prompt, novelty against the corpus
    let mut groups: BTreeMap<Option<u16>, Vec<usize>> = BTreeMap::new();
    for &i in &ok {
        groups.entry(samples[i].target_sg).or_default().push(i);
    }
    for members in groups.values() {
        let crystals: Vec<Crystal> = members.iter().map(|&i| parsed[i].as_ref().expect("parsed").1.clone()).collect();
        for class in dedupe(&crystals, &config.match_tolerances, exec) {
            let rep = samples[members[class[0]]].id;
            for k in class {
                samples[members[k]].unique_class = Some(rep);
            }
        }
    }
    match &corpus_bytes {
        Some(bytes) => {
            let index = ReferenceIndex::from_jsonl(&bytes[..], config.match_tolerances, exec)
                .map_err(|e| RoundError::Input(e.to_string()))?;
            let novel = exec.map(&ok, |&i| index.is_novel(&parsed[i].as_ref().expect("parsed").1));
            for (&i, v) in ok.iter().zip(novel) {
                samples[i].novel = Some(v);
            }
        }
        None => {
            round.manifest.warnings.push("no novelty corpus configured; every parsed sample counts as novel".into());
            for &i in &ok {
                samples[i].novel = Some(true);
            }
        }
    }
    round.count(&samples);

    let pairs = build_pairs(&samples, config.seed, config.pair_mode);
    for t in Tier::ALL {
        round.manifest.pair_counts.insert(t, pairs.pairs.iter().filter(|p| p.tier == t).count());
    }
    round.manifest.warnings.extend(pairs.warnings);
    let metrics = round_metrics(&samples, &config.spacegroups);

    let sample_bytes = to_jsonl(&samples);
    let pair_bytes = to_jsonl(&pairs.pairs);
    let mut metric_bytes = serde_json::to_vec_pretty(&metrics).expect("plain data serializes");
    metric_bytes.push(b'\n');
    for (name, bytes) in [(SAMPLES_FILE, &sample_bytes), (PAIRS_FILE, &pair_bytes), (METRICS_FILE, &metric_bytes)] {
        fs::write(out_dir.join(name), bytes)?;
        round.manifest.outputs.insert(name.to_string(), digest(bytes));
    }
    write_json(&out_dir.join(MANIFEST_FILE), &round.manifest)?;
    Ok(round.manifest)
}
