use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::sample::Sample;
use crate::thermo::StabilityLabel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[allow(non_camel_case_types)]
pub enum Tier {
    /// stable over metastable
    SM,
    /// stable over unstable
    SU,
    /// metastable over unstable
    MU,
    /// stable and novel over stable and known
    NOV,
    /// acceptable with the requested group over acceptable without it
    SG_MATCH,
    /// acceptable over unstable, same conditioned prompt
    SG_STAB,
}

impl Tier {
    pub const ALL: [Tier; 6] = [Tier::SM, Tier::SU, Tier::MU, Tier::NOV, Tier::SG_MATCH, Tier::SG_STAB];

    fn stream(self) -> u64 {
        self as u64 + 1
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreferencePair {
    pub prompt: String,
    pub chosen: String,
    pub rejected: String,
    pub tier: Tier,
    #[serde(skip)]
    pub chosen_id: u64,
    #[serde(skip)]
    pub rejected_id: u64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PairSet {
    pub pairs: Vec<PreferencePair>,
    pub warnings: Vec<String>,
}

impl PairSet {
    pub fn extend(&mut self, other: PairSet) {
        self.pairs.extend(other.pairs);
        self.warnings.extend(other.warnings);
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairMode {
    #[default]
    Tiered,
    /// Stable and metastable pooled as accepted against unstable.
    NonTiered,
}

/// Uniform draws without replacement; the pool is reshuffled once empty.
struct Deck<'a> {
    pool: Vec<&'a Sample>,
    order: Vec<usize>,
    rng: ChaCha8Rng,
}

impl<'a> Deck<'a> {
    fn new(pool: Vec<&'a Sample>, seed: u64, tier: Tier) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(tier.stream());
        Deck { pool, order: Vec::new(), rng }
    }

    fn draw(&mut self) -> &'a Sample {
        if self.order.is_empty() {
            self.order = (0..self.pool.len()).rev().collect();
            self.order.shuffle(&mut self.rng);
        }
        self.pool[self.order.pop().expect("deck is never drawn from an empty pool")]
    }
}

fn sorted(samples: &[Sample]) -> Vec<&Sample> {
    let mut v: Vec<&Sample> = samples.iter().collect();
    v.sort_by_key(|s| s.id);
    v
}

fn with_label(samples: &[&Sample], label: StabilityLabel) -> Vec<usize> {
    (0..samples.len()).filter(|&i| samples[i].stability == Some(label)).collect()
}

/// Pair each chosen sample against `per` partners from `pool`.
fn pair_up<'a>(
    out: &mut PairSet,
    chosen: &[&'a Sample],
    pool: Vec<&'a Sample>,
    per: usize,
    tier: Tier,
    seed: u64,
    empty_note: &str,
) {
    if chosen.is_empty() {
        return;
    }
    if pool.is_empty() {
        out.warnings.push(format!("{tier:?} pairs skipped: {empty_note}"));
        return;
    }
    let mut deck = Deck::new(pool, seed, tier);
    for c in chosen {
        for _ in 0..per {
            let r = deck.draw();
            if r.text == c.text {
                out.warnings.push(format!("{tier:?} pair {}/{} dropped: identical texts", c.id, r.id));
                continue;
            }
            out.pairs.push(PreferencePair {
                prompt: c.prompt.clone(),
                chosen: c.text.clone(),
                rejected: r.text.clone(),
                tier,
                chosen_id: c.id,
                rejected_id: r.id,
            });
        }
    }
}

fn pick<'a>(samples: &[&'a Sample], idx: &[usize]) -> Vec<&'a Sample> {
    idx.iter().map(|&i| samples[i]).collect()
}

/// Stability-tier pairs: every stable sample gets one metastable and two
/// unstable partners, every metastable sample two unstable partners.
pub fn tiered_pairs(samples: &[Sample], seed: u64, mode: PairMode) -> PairSet {
    let all = sorted(samples);
    let stable = pick(&all, &with_label(&all, StabilityLabel::Stable));
    let meta = pick(&all, &with_label(&all, StabilityLabel::Metastable));
    let unstable = pick(&all, &with_label(&all, StabilityLabel::Unstable));
    let mut out = PairSet::default();
    match mode {
        PairMode::Tiered => {
            pair_up(&mut out, &stable, meta.clone(), 1, Tier::SM, seed, "no metastable samples");
            pair_up(&mut out, &stable, unstable.clone(), 2, Tier::SU, seed, "no unstable samples");
            pair_up(&mut out, &meta, unstable, 2, Tier::MU, seed, "no unstable samples");
        }
        PairMode::NonTiered => {
            let mut accepted = stable;
            accepted.extend(meta);
            accepted.sort_by_key(|s| s.id);
            let mut pooled = PairSet::default();
            pair_up(&mut pooled, &accepted, unstable, 2, Tier::SU, seed, "no unstable samples");
            for mut p in pooled.pairs {
                if all.iter().any(|s| s.id == p.chosen_id && s.stability == Some(StabilityLabel::Metastable)) {
                    p.tier = Tier::MU;
                }
                out.pairs.push(p);
            }
            out.warnings.extend(pooled.warnings);
        }
    }
    out
}

/// One pair per stable novel sample against a stable sample already in the
/// reference corpus.
pub fn novelty_pairs(samples: &[Sample], seed: u64) -> PairSet {
    let all = sorted(samples);
    let stable: Vec<&Sample> = all.into_iter().filter(|s| s.stability == Some(StabilityLabel::Stable)).collect();
    let novel: Vec<&Sample> = stable.iter().copied().filter(|s| s.novel == Some(true)).collect();
    let known: Vec<&Sample> = stable.iter().copied().filter(|s| s.novel == Some(false)).collect();
    let mut out = PairSet::default();
    pair_up(&mut out, &novel, known, 1, Tier::NOV, seed, "no stable samples that match the corpus");
    out
}

/// Pairs for one conditioned prompt. Acceptable means stable or metastable.
pub fn spacegroup_pairs(samples: &[Sample], target_sg: u16, seed: u64) -> PairSet {
    let all = sorted(samples);
    let acceptable: Vec<&Sample> = all
        .iter()
        .copied()
        .filter(|s| matches!(s.stability, Some(StabilityLabel::Stable | StabilityLabel::Metastable)))
        .collect();
    let (matching, other): (Vec<&Sample>, Vec<&Sample>) =
        acceptable.iter().copied().partition(|s| s.detected_sg == Some(target_sg));
    let unstable: Vec<&Sample> =
        all.iter().copied().filter(|s| s.stability == Some(StabilityLabel::Unstable)).collect();
    let mut out = PairSet::default();
    pair_up(
        &mut out,
        &matching,
        other,
        1,
        Tier::SG_MATCH,
        seed,
        &format!("no acceptable samples outside group {target_sg}"),
    );
    pair_up(&mut out, &acceptable, unstable, 2, Tier::SG_STAB, seed, "no unstable samples");
    out
}
