//! One pass/fail line per acceptance criterion. Run with `--nocapture` to
//! see the table.

use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wyckit::codec::{encode_coords, encode_wyckoff, parse_wyckoff, reconstruct, render_prompt, PromptKind};
use wyckit::geometry::{dedupe, primitive_cell, structural_validity, structures_match, Lattice, MatchTolerances};
use wyckit::rlip::{dpo_loss, spacegroup_pairs, tiered_pairs, LogProbPair, PairMode, ParseStatus, Sample, Tier};
use wyckit::symcore::{assign_wyckoff, detect_spacegroup, expand_orbit, SpaceGroupDb, DEFAULT_SYM_TOL};
use wyckit::thermo::{
    build_hull, classify_stability, compositional_validity, parse_formula, ssun_eligible, Composition, HullEntry,
    MissingPolicy, OxidationTable, StabilityLabel, Thresholds,
};
use wyckit::{Crystal, Element, Exec, LatticeParams, Site};

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn golden_blocks() -> Vec<String> {
    let text = fs::read_to_string(fixtures().join("golden.txt")).unwrap();
    text.split("\n\n").map(|b| if b.ends_with('\n') { b.to_string() } else { format!("{b}\n") }).collect()
}

fn golden(i: usize) -> Crystal {
    reconstruct(&parse_wyckoff(&golden_blocks()[i]).unwrap()).unwrap()
}

fn single_spaced(text: &str) -> String {
    text.lines().map(|l| l.split_whitespace().collect::<Vec<_>>().join(" ") + "\n").collect()
}

fn el(s: &str) -> Element {
    Element::from_symbol(s).unwrap()
}

fn golden_round_trip() -> String {
    let prompt = render_prompt(PromptKind::Unconditional, None).unwrap();
    assert!(prompt.text.starts_with("Below is a description of a bulk material."));
    assert!(render_prompt(PromptKind::Spacegroup, Some(62)).unwrap().text.contains("The spacegroup number is 62."));
    for (block, (atoms, number)) in golden_blocks().iter().zip([(12, 62), (24, 15), (12, 216)]) {
        let crystal = reconstruct(&parse_wyckoff(block).unwrap()).unwrap();
        assert_eq!(crystal.len(), atoms);
        assert_eq!(detect_spacegroup(&crystal, 0.01), number);
        assert_eq!(encode_wyckoff(&crystal, 0.01).unwrap(), single_spaced(block));
    }
    "12/24/12 atoms, groups 62/15/216, byte-identical".into()
}

fn database_self_test() -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut positions = 0;
    for g in SpaceGroupDb::standard().groups() {
        for w in &g.wyckoff_positions {
            let p = [rng.random_range(0.07..0.09), rng.random_range(0.17..0.19), rng.random_range(0.37..0.39)];
            let orbit = expand_orbit(g, w.representative().apply(p));
            assert_eq!(orbit.len(), w.multiplicity, "{} {}", g.number, w.label());
            assert_eq!(assign_wyckoff(g, &orbit, DEFAULT_SYM_TOL).unwrap().letter, w.letter);
            positions += 1;
        }
    }
    format!("230 groups, {positions} positions")
}

fn random_system(rng: &mut ChaCha8Rng) -> (Vec<Element>, Vec<HullEntry>) {
    let pool = ["Li", "O", "Fe", "S", "Cu"];
    let k = rng.random_range(1..=3);
    let mut elements: Vec<Element> = pool.choose_multiple(rng, k).map(|s| el(s)).collect();
    elements.sort();
    let mut entries = Vec::new();
    let n = rng.random_range(1..=8);
    while entries.len() < n {
        let pairs: Vec<(Element, f64)> = elements
            .iter()
            .filter_map(|&e| {
                let k = rng.random_range(0..4u32);
                (k > 0).then_some((e, k as f64))
            })
            .collect();
        if !pairs.is_empty() {
            entries.push(HullEntry::new(Composition::new(pairs).unwrap(), rng.random_range(-1.0..0.5)));
        }
    }
    (elements, entries)
}

/// Minimum over exact mixtures of at most `d` entries, each solved directly.
fn brute_force(entries: &[HullEntry], elements: &[Element], target: &Composition) -> f64 {
    let frac = |c: &Composition| DVector::from_iterator(elements.len(), elements.iter().map(|&e| c.fraction(e)));
    let x = frac(target);
    let cols: Vec<DVector<f64>> = entries.iter().map(|e| frac(&e.composition)).collect();
    let mut best = f64::INFINITY;
    for mask in 1u32..(1 << entries.len()) {
        let chosen: Vec<usize> = (0..entries.len()).filter(|i| mask & (1 << i) != 0).collect();
        if chosen.len() > elements.len() {
            continue;
        }
        let a = DMatrix::from_columns(&chosen.iter().map(|&i| cols[i].clone()).collect::<Vec<_>>());
        let Ok(w) = a.clone().svd(true, true).solve(&x, 1e-12) else { continue };
        if (&a * &w - &x).norm() < 1e-10 && w.iter().all(|v| *v >= -1e-12) {
            best = best.min(chosen.iter().zip(w.iter()).map(|(&i, wi)| wi * entries[i].energy_per_atom).sum());
        }
    }
    best
}

fn hull_oracle() -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut queries = 0;
    for _ in 0..200 {
        let (elements, entries) = random_system(&mut rng);
        let hull = build_hull(entries.clone(), &elements).unwrap();
        let mut all = entries.clone();
        all.extend(elements.iter().map(|&e| HullEntry::new(Composition::new([(e, 1.0)]).unwrap(), 0.0)));
        for e in &entries {
            let got = hull.hull_energy(&e.composition).unwrap();
            assert!((got - brute_force(&all, &elements, &e.composition)).abs() <= 1e-9);
            let above = hull.energy_above_hull(e).unwrap();
            assert!(above >= -1e-12);
            queries += 1;
        }
        for e in hull.entries() {
            let h = hull.hull_energy(&e.composition).unwrap();
            if (e.energy_per_atom - h).abs() < 1e-12 {
                assert!(hull.energy_above_hull(e).unwrap().abs() < 1e-12);
            }
        }
    }
    format!("200 systems, {queries} queries within 1e-9")
}

fn stability_buckets() -> String {
    use StabilityLabel::*;
    let t = Thresholds::default();
    let expected =
        [(-0.01, Stable, true), (0.0, Stable, true), (0.05, Metastable, true), (0.08, Metastable, true), (0.09, Unstable, true), (0.1, Unstable, true), (0.12, Unstable, false)];
    for (e, label, ssun) in expected {
        assert_eq!(classify_stability(e, &t), label, "{e}");
        assert_eq!(ssun_eligible(e), ssun, "{e}");
    }
    "7 boundary values".into()
}

fn labelled(labels: &[StabilityLabel], groups: &[u16]) -> Vec<Sample> {
    (0..labels.len())
        .map(|i| {
            let mut s = Sample::new(i as u64, "p".into(), None, 1.0);
            s.text = format!("g{i}");
            s.parse_status = ParseStatus::Ok;
            s.stability = Some(labels[i]);
            s.detected_sg = groups.get(i).copied();
            s
        })
        .collect()
}

fn pair_counts() -> String {
    use StabilityLabel::*;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for seed in 0..500 {
        let n = rng.random_range(0..50);
        let labels: Vec<StabilityLabel> = (0..n).map(|_| [Stable, Metastable, Unstable][rng.random_range(0..3)]).collect();
        let groups: Vec<u16> = (0..n).map(|_| if rng.random_bool(0.5) { 38 } else { 47 }).collect();
        let count = |l| labels.iter().filter(|x| **x == l).count();
        let (s, m, u) = (count(Stable), count(Metastable), count(Unstable));
        let set = tiered_pairs(&labelled(&labels, &[]), seed, PairMode::Tiered);
        let skipped = if m == 0 { s } else { 0 } + if u == 0 { 2 * s + 2 * m } else { 0 };
        assert_eq!(set.pairs.len(), 3 * s + 2 * m - skipped);
        let set = spacegroup_pairs(&labelled(&labels, &groups), 38, seed);
        let accepted = s + m;
        let stab = set.pairs.iter().filter(|p| p.tier == Tier::SG_STAB).count();
        assert_eq!(stab, if u > 0 { 2 * accepted } else { 0 });
    }
    "500 multisets".into()
}

fn dpo_checks() -> String {
    let zero = LogProbPair { logp_policy_chosen: -3.0, logp_ref_chosen: -4.0, logp_policy_rejected: -6.0, logp_ref_rejected: -7.0 };
    assert!((dpo_loss(&zero, 0.1).unwrap() - std::f64::consts::LN_2).abs() < 1e-15);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..1000 {
        let beta = rng.random_range(0.01..2.0);
        let m: f64 = rng.random_range(-15.0..15.0);
        let p = LogProbPair { logp_policy_chosen: m, logp_ref_chosen: 0.0, logp_policy_rejected: 0.0, logp_ref_rejected: 0.0 };
        let closed = -(1.0 / (1.0 + (-beta * m).exp())).ln();
        assert!((dpo_loss(&p, beta).unwrap() - closed).abs() < 1e-12);
        let d = rng.random_range(1e-3..1.0);
        assert!(dpo_loss(&LogProbPair { logp_policy_chosen: m + d, ..p }, beta).unwrap() < dpo_loss(&p, beta).unwrap());
        assert!(dpo_loss(&LogProbPair { logp_policy_rejected: d, ..p }, beta).unwrap() > dpo_loss(&p, beta).unwrap());
    }
    "ln 2 at zero margin, 1000 closed-form draws".into()
}

fn translate(c: &Crystal, t: [f64; 3]) -> Crystal {
    let sites = c.sites.iter().map(|s| Site::new(s.element, [0, 1, 2].map(|k| s.frac[k] + t[k]))).collect();
    Crystal::new(c.lattice, sites).unwrap()
}

fn supercell(c: &Crystal, k: [usize; 3]) -> Crystal {
    let mut sites = Vec::new();
    for i in 0..k[0] {
        for j in 0..k[1] {
            for l in 0..k[2] {
                let off = [i as f64, j as f64, l as f64];
                sites.extend(c.sites.iter().map(|s| Site::new(s.element, [0, 1, 2].map(|d| (s.frac[d] + off[d]) / k[d] as f64))));
            }
        }
    }
    let l = c.lattice;
    let lattice = LatticeParams::new(l.a * k[0] as f64, l.b * k[1] as f64, l.c * k[2] as f64, l.alpha, l.beta, l.gamma);
    Crystal::new(lattice, sites).unwrap()
}

fn displace_first_atom(c: &Crystal, distance: f64) -> Crystal {
    let lattice = Lattice::from_params(&c.lattice);
    let cart = lattice.to_cartesian(c.sites[0].frac) + nalgebra::RowVector3::new(distance, 0.0, 0.0);
    let f = cart * lattice.matrix.try_inverse().unwrap();
    let mut sites = c.sites.clone();
    sites[0].frac = [f[0], f[1], f[2]];
    Crystal::new(c.lattice, sites).unwrap()
}

fn matching_properties() -> String {
    let tol = MatchTolerances::default();
    let set: Vec<Crystal> = (0..3).map(golden).collect();
    for c in &set {
        assert!(structures_match(c, &translate(c, [0.31, 0.47, 0.05]), &tol));
        for k in [[2, 1, 1], [1, 3, 1], [2, 2, 1]] {
            assert!(structures_match(c, &supercell(c, k), &tol), "{k:?}");
        }
        let prim = primitive_cell(c, 1e-3);
        let scale = (prim.lattice.volume() / prim.len() as f64).cbrt();
        assert!(!structures_match(c, &displace_first_atom(c, 2.0 * tol.stol * scale), &tol));
    }
    let conventional = &set[1];
    let primitive = primitive_cell(conventional, 1e-3);
    assert_eq!((conventional.len(), primitive.len()), (24, 12));
    assert!(structures_match(conventional, &primitive, &tol));

    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let crystals: Vec<Crystal> = (0..100)
        .map(|i| match rng.random_range(0..3) {
            0 => translate(&set[i % 3], [rng.random(), rng.random(), rng.random()]),
            1 => displace_first_atom(&set[i % 3], 1.2),
            _ => set[i % 3].clone(),
        })
        .collect();
    let canonical = |classes: Vec<Vec<usize>>, relabel: &[usize]| {
        let mut out: Vec<Vec<usize>> = classes
            .into_iter()
            .map(|c| {
                let mut v: Vec<usize> = c.into_iter().map(|i| relabel[i]).collect();
                v.sort_unstable();
                v
            })
            .collect();
        out.sort();
        out
    };
    let identity: Vec<usize> = (0..100).collect();
    let base = canonical(dedupe(&crystals, &tol, Exec::Parallel), &identity);
    let mut order = identity.clone();
    order.shuffle(&mut rng);
    let permuted: Vec<Crystal> = order.iter().map(|&i| crystals[i].clone()).collect();
    assert_eq!(canonical(dedupe(&permuted, &tol, Exec::Parallel), &order), base);
    format!("{} classes over 100 structures", base.len())
}

fn mock_round() -> String {
    let bin = env!("CARGO_BIN_EXE_wyckit");
    let fixture = fixtures().join("round");
    let dir = tempfile::tempdir().unwrap();
    let path = format!("{}:{}", Path::new(bin).parent().unwrap().display(), std::env::var("PATH").unwrap_or_default());
    for (jobs, name) in [("1", "a"), ("8", "b"), ("8", "c")] {
        let out = dir.path().join(name);
        let status = Command::new(bin)
            .args(["--config", "round.toml", "--jobs", jobs, "round", "--out", out.to_str().unwrap()])
            .current_dir(&fixture)
            .env("PATH", &path)
            .output()
            .unwrap();
        assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
        for f in ["manifest.json", "pairs.jsonl", "metrics.json"] {
            assert_eq!(fs::read(out.join(f)).unwrap(), fs::read(fixture.join("expected").join(f)).unwrap(), "{f}");
        }
    }
    let m: serde_json::Value = serde_json::from_slice(&fs::read(fixture.join("expected/manifest.json")).unwrap()).unwrap();
    assert_eq!(m["prompts"], 30);
    assert_eq!(m["parse_counts"], serde_json::json!({"ok": 27, "lexical_error": 2, "semantic_error": 1}));
    "30 samples, byte-identical at --jobs 1 and 8".into()
}

fn validity_rules() -> String {
    let h = el("H");
    let pair = Crystal::new(LatticeParams::cubic(10.0), vec![Site::new(h, [0.0; 3]), Site::new(h, [0.03, 0.0, 0.0])]).unwrap();
    assert!(!structural_validity(&pair));
    let table = OxidationTable::standard();
    assert!(compositional_validity(&parse_formula("NaCl").unwrap(), table, MissingPolicy::Strict));
    assert!(!compositional_validity(&parse_formula("Na2Cl").unwrap(), table, MissingPolicy::Strict));
    "0.3 Å pair invalid, NaCl valid, Na2Cl invalid".into()
}

fn compression() -> String {
    let mut detail = Vec::new();
    for i in 0..3 {
        let c = golden(i);
        let w = encode_wyckoff(&c, 0.01).unwrap();
        let x = encode_coords(&c);
        let site_lines = |t: &str, skip: usize| t.lines().count() - skip;
        assert!(site_lines(&w, 5) < site_lines(&x, 3));
        assert!(w.len() < x.len());
        detail.push(format!("{}/{} chars", w.len(), x.len()));
    }
    detail.join(", ")
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> String, Option<Duration>); 10] = [
        ("golden round trip", golden_round_trip, Some(Duration::from_secs(1))),
        ("Wyckoff database self-test", database_self_test, Some(Duration::from_secs(60))),
        ("hull oracle equivalence", hull_oracle, Some(Duration::from_secs(30))),
        ("stability bucketing", stability_buckets, None),
        ("pair-count formula", pair_counts, None),
        ("DPO loss", dpo_checks, None),
        ("matching and dedupe", matching_properties, Some(Duration::from_secs(60))),
        ("end-to-end mock round", mock_round, None),
        ("validity rules", validity_rules, None),
        ("compression", compression, None),
    ];
    let mut failed = Vec::new();
    for (i, (name, check, limit)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check));
        let elapsed = start.elapsed();
        let verdict = match (&result, limit) {
            (Ok(_), Some(l)) if elapsed > l => format!("FAIL (took {elapsed:.2?}, limit {l:?})"),
            (Ok(detail), _) => format!("PASS ({detail}; {elapsed:.2?})"),
            (Err(_), _) => "FAIL".to_string(),
        };
        println!("criterion {:>2} {name}: {verdict}", i + 1);
        if !verdict.starts_with("PASS") {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
