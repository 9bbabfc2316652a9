mod common;

use common::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wyckit::codec::{
    encode_coords, encode_wyckoff, parse_coords, parse_wyckoff, reconstruct, render_prompt, ErrorKind, PromptKind,
};
use wyckit::symcore::{detect_spacegroup, DEFAULT_SYM_TOL};
use wyckit::{Crystal, Site};

fn single_spaced(text: &str) -> String {
    text.lines().map(|l| l.split_whitespace().collect::<Vec<_>>().join(" ") + "\n").collect()
}

#[test]
fn golden_blocks_round_trip() {
    for (text, atoms, number) in [(HO_AL_NI, 12, 62), (MN_O_F, 24, 15), (TI_NI_SN, 12, 216)] {
        let record = parse_wyckoff(text).unwrap();
        assert_eq!(record.total_atoms, atoms);
        let crystal = reconstruct(&record).unwrap();
        assert_eq!(crystal.len(), atoms);
        assert_eq!(detect_spacegroup(&crystal, DEFAULT_SYM_TOL), number);
        assert_eq!(encode_wyckoff(&crystal, DEFAULT_SYM_TOL).unwrap(), single_spaced(text));
    }
}

#[test]
fn mn_block_has_four_sites() {
    let r = parse_wyckoff(MN_O_F).unwrap();
    assert_eq!(r.sites.len(), 4);
    assert_eq!(r.spacegroup, 15);
    let labels: Vec<String> = r.sites.iter().map(|s| s.label()).collect();
    assert_eq!(labels, ["8f", "8f", "4e", "4a"]);
}

#[test]
fn heusler_tin_orbit_is_the_face_centers() {
    let c = reconstruct(&parse_wyckoff(TI_NI_SN).unwrap()).unwrap();
    let mut tin: Vec<[f64; 3]> = c.sites.iter().filter(|s| s.element == el("Sn")).map(|s| s.frac).collect();
    tin.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert_eq!(tin, [[0.0, 0.0, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5], [0.5, 0.5, 0.0]]);
}

#[test]
fn golden_prompts() {
    let p = render_prompt(PromptKind::Unconditional, None).unwrap();
    assert_eq!(p.text, UNCONDITIONAL_PROMPT);
    let p = render_prompt(PromptKind::Spacegroup, Some(216)).unwrap();
    assert_eq!(
        p.text,
        "Below is a description of a bulk material. The spacegroup number is 216. Generate a description of the lengths and angles of the lattice vectors and then the element type and coordinates for each atom within the lattice:"
    );
}

#[test]
fn wyckoff_block_is_shorter_than_coordinate_block() {
    for text in [HO_AL_NI, MN_O_F, TI_NI_SN] {
        let crystal = reconstruct(&parse_wyckoff(text).unwrap()).unwrap();
        let wyckoff = encode_wyckoff(&crystal, DEFAULT_SYM_TOL).unwrap();
        let coords = encode_coords(&crystal);
        assert!(wyckoff.lines().count() < coords.lines().count());
        assert!(wyckoff.len() < coords.len());
    }
    let c = reconstruct(&parse_wyckoff(HO_AL_NI).unwrap()).unwrap();
    assert_eq!(encode_coords(&c).lines().skip(4).count(), 12);
}

#[test]
fn coordinate_block_round_trips_golden_crystals() {
    for text in [HO_AL_NI, MN_O_F, TI_NI_SN] {
        let crystal = reconstruct(&parse_wyckoff(text).unwrap()).unwrap();
        let block = encode_coords(&crystal);
        let back = parse_coords(&block).unwrap();
        assert_eq!(encode_coords(&back), block);
        assert_eq!(encode_wyckoff(&back, DEFAULT_SYM_TOL).unwrap(), single_spaced(text));
    }
}

/// Random crystals built from every group: encode, parse, reconstruct and
/// encode again reproduces the first block exactly.
#[test]
fn encode_parse_reconstruct_is_stable_for_every_group() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let species = ["Li", "O", "Fe", "S", "Ba"];
    for n in 1..=230u16 {
        let g = group(n);
        let lattice = common::lattice_for(g, &mut rng);
        let count = rng.random_range(1..=3);
        let mut sites = Vec::new();
        for (k, symbol) in species.iter().take(count).enumerate() {
            let w = if k == 0 {
                g.general_position()
            } else {
                &g.wyckoff_positions[rng.random_range(0..g.wyckoff_positions.len())]
            };
            let p = w.representative().apply(generic_point(&mut rng).map(|v| v + 0.2 * k as f64));
            sites.push((*symbol, p.map(|v| (v.rem_euclid(1.0) * 1000.0).round() / 1000.0)));
        }
        let crystal = expanded(n, lattice, &sites);
        let first = encode_wyckoff(&crystal, DEFAULT_SYM_TOL).unwrap();
        let record = parse_wyckoff(&first).unwrap();
        // sparse random crystals may carry extra symmetry
        assert!(group(record.spacegroup).order() >= g.order(), "group {n}: {sites:?} {lattice:?}\n{first}");
        let rebuilt = reconstruct(&record).unwrap();
        assert_eq!(rebuilt.len(), crystal.len());
        let second = encode_wyckoff(&rebuilt, DEFAULT_SYM_TOL).unwrap();
        assert_eq!(first, second, "group {n}");
        assert_eq!(parse_wyckoff(&second).unwrap(), record);
    }
}

fn atom_set(c: &Crystal) -> Vec<(String, [String; 3])> {
    let mut v: Vec<_> = c
        .sites
        .iter()
        .map(|s| (s.element.symbol().to_string(), s.frac.map(|x| format!("{:.3}", (x + 1e-9).rem_euclid(1.0)))))
        .collect();
    v.sort();
    v
}

#[test]
fn atom_order_changes_only_the_chosen_generators() {
    let mut c = reconstruct(&parse_wyckoff(MN_O_F).unwrap()).unwrap();
    let before = parse_wyckoff(&encode_wyckoff(&c, DEFAULT_SYM_TOL).unwrap()).unwrap();
    c.sites.reverse();
    c.sites.rotate_left(7);
    let after = parse_wyckoff(&encode_wyckoff(&c, DEFAULT_SYM_TOL).unwrap()).unwrap();
    assert_eq!(after.formula, before.formula);
    let labels = |r: &wyckit::codec::WyckoffRecord| r.sites.iter().map(|s| s.label()).collect::<Vec<_>>();
    assert_eq!(labels(&after), labels(&before));
    assert_eq!(atom_set(&reconstruct(&after).unwrap()), atom_set(&reconstruct(&before).unwrap()));
}

#[test]
fn encoding_is_deterministic() {
    let c = reconstruct(&parse_wyckoff(MN_O_F).unwrap()).unwrap();
    let first = encode_wyckoff(&c, DEFAULT_SYM_TOL).unwrap();
    for _ in 0..5 {
        assert_eq!(encode_wyckoff(&c, DEFAULT_SYM_TOL).unwrap(), first);
    }
}

#[test]
fn encoding_is_origin_independent() {
    let c = reconstruct(&parse_wyckoff(HO_AL_NI).unwrap()).unwrap();
    let shifted: Vec<Site> =
        c.sites.iter().map(|s| Site::new(s.element, [s.frac[0] + 0.5, s.frac[1], s.frac[2] + 0.5])).collect();
    let shifted = Crystal::new(c.lattice, shifted).unwrap();
    let text = encode_wyckoff(&shifted, DEFAULT_SYM_TOL).unwrap();
    let r = parse_wyckoff(&text).unwrap();
    assert_eq!(r.spacegroup, 62);
    assert_eq!(reconstruct(&r).unwrap().len(), 12);
}

proptest! {
    #[test]
    fn parser_is_total_on_bytes(bytes in prop::collection::vec(any::<u8>(), 0..400)) {
        let text = String::from_utf8_lossy(&bytes);
        let _ = parse_wyckoff(&text);
        let _ = parse_coords(&text);
    }

    #[test]
    fn parser_is_total_on_mutated_goldens(cut in 0usize..200, insert in "[ -~\n]{0,12}", which in 0usize..3) {
        let base = [HO_AL_NI, MN_O_F, TI_NI_SN][which];
        let cut = cut.min(base.len());
        let mut text = base[..cut].to_string();
        text.push_str(&insert);
        text.push_str(&base[cut..]);
        if let Err(e) = parse_wyckoff(&text) {
            prop_assert!(matches!(e.kind(), ErrorKind::Lexical | ErrorKind::Semantic));
        }
    }
}
