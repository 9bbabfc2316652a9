use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wyckit::thermo::{
    agreement_stats, build_hull, classify_stability, compositional_validity, parse_formula, ssun_eligible, Composition,
    HullEntry, MissingPolicy, OxidationTable, StabilityLabel, Thresholds,
};
use wyckit::Element;

const POOL: [&str; 6] = ["Li", "O", "Fe", "S", "Cu", "Zn"];

fn el(s: &str) -> Element {
    Element::from_symbol(s).unwrap()
}

fn random_system(rng: &mut ChaCha8Rng) -> (Vec<Element>, Vec<HullEntry>) {
    let d = rng.random_range(1..=3);
    let mut elements: Vec<Element> = Vec::new();
    while elements.len() < d {
        let e = el(POOL[rng.random_range(0..POOL.len())]);
        if !elements.contains(&e) {
            elements.push(e);
        }
    }
    let n = rng.random_range(1..=8);
    let mut entries = Vec::new();
    while entries.len() < n {
        let pairs: Vec<(Element, f64)> = elements
            .iter()
            .filter_map(|&e| {
                let k = rng.random_range(0..4u32);
                (k > 0).then_some((e, k as f64))
            })
            .collect();
        if pairs.is_empty() {
            continue;
        }
        let energy = rng.random_range(-1.0..0.5);
        entries.push(HullEntry::new(Composition::new(pairs).unwrap(), energy));
    }
    (elements, entries)
}

fn fractions(c: &Composition, elements: &[Element]) -> DVector<f64> {
    DVector::from_iterator(elements.len(), elements.iter().map(|&e| c.fraction(e)))
}

/// Lowest energy over every mixture of at most `d` entries that reproduces
/// the target exactly, by solving each small linear system directly.
fn oracle_hull_energy(entries: &[HullEntry], elements: &[Element], target: &Composition) -> f64 {
    let x = fractions(target, elements);
    let d = elements.len();
    let cols: Vec<DVector<f64>> = entries.iter().map(|e| fractions(&e.composition, elements)).collect();
    let mut best = f64::INFINITY;
    let n = entries.len();
    for mask in 1u32..(1 << n) {
        let chosen: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        if chosen.len() > d {
            continue;
        }
        let a = DMatrix::from_columns(&chosen.iter().map(|&i| cols[i].clone()).collect::<Vec<_>>());
        let Ok(w) = a.clone().svd(true, true).solve(&x, 1e-12) else { continue };
        if (&a * &w - &x).norm() > 1e-10 || w.iter().any(|v| *v < -1e-12) {
            continue;
        }
        let energy: f64 = chosen.iter().zip(w.iter()).map(|(&i, wi)| wi * entries[i].energy_per_atom).sum();
        best = best.min(energy);
    }
    best
}

fn with_endpoints(mut entries: Vec<HullEntry>, elements: &[Element]) -> Vec<HullEntry> {
    for &e in elements {
        entries.push(HullEntry::new(Composition::new([(e, 1.0)]).unwrap(), 0.0));
    }
    entries
}

#[test]
fn hull_energy_matches_subset_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..200 {
        let (elements, entries) = random_system(&mut rng);
        let hull = build_hull(entries.clone(), &elements).unwrap();
        let all = with_endpoints(entries.clone(), &elements);
        let mut queries: Vec<Composition> = entries.iter().map(|e| e.composition.clone()).collect();
        for _ in 0..3 {
            let pairs = elements.iter().map(|&e| (e, rng.random_range(1..6u32) as f64));
            queries.push(Composition::new(pairs).unwrap());
        }
        for q in &queries {
            let got = hull.hull_energy(q).unwrap();
            let want = oracle_hull_energy(&all, &elements, q);
            assert!((got - want).abs() <= 1e-9, "{q}: simplex {got} oracle {want}");
        }
    }
}

#[test]
fn entries_never_sit_above_themselves() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let (elements, entries) = random_system(&mut rng);
        let hull = build_hull(entries.clone(), &elements).unwrap();
        let mut on_hull = 0;
        for e in &entries {
            let above = hull.energy_above_hull(e).unwrap();
            assert!(above >= -1e-12, "{}: {above}", e.composition);
            on_hull += usize::from(above.abs() < 1e-12);
        }
        let lowest = entries.iter().map(|e| e.energy_per_atom).fold(f64::INFINITY, f64::min);
        if lowest < 0.0 {
            assert!(on_hull > 0);
        }
    }
}

#[test]
fn binary_vertices() {
    let li = el("Li");
    let o = el("O");
    let entries = vec![
        HullEntry::new(parse_formula("Li2O").unwrap(), -2.0),
        HullEntry::new(parse_formula("LiO").unwrap(), -1.0),
        HullEntry::new(parse_formula("LiO2").unwrap(), -1.5),
    ];
    let hull = build_hull(entries.clone(), &[li, o]).unwrap();
    assert!(hull.energy_above_hull(&entries[0]).unwrap().abs() < 1e-12);
    assert!(hull.energy_above_hull(&entries[2]).unwrap().abs() < 1e-12);
    // LiO lies between Li2O (x_O = 1/3) and LiO2 (x_O = 2/3) at the midpoint
    let mid = hull.hull_energy(&entries[1].composition).unwrap();
    assert!((mid + 1.75).abs() < 1e-12);
    assert!((hull.energy_above_hull(&entries[1]).unwrap() - 0.75).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lowering_an_energy_never_raises_the_hull(seed in any::<u64>(), which in 0usize..8, drop in 0.0f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (elements, entries) = random_system(&mut rng);
        let which = which % entries.len();
        let before = build_hull(entries.clone(), &elements).unwrap();
        let mut lowered = entries.clone();
        lowered[which].energy_per_atom -= drop;
        let after = build_hull(lowered, &elements).unwrap();
        for e in &entries {
            prop_assert!(after.hull_energy(&e.composition).unwrap() <= before.hull_energy(&e.composition).unwrap() + 1e-12);
        }
    }

    #[test]
    fn adding_an_entry_never_raises_the_hull(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (elements, entries) = random_system(&mut rng);
        let before = build_hull(entries[1..].to_vec(), &elements).unwrap();
        let after = build_hull(entries.clone(), &elements).unwrap();
        for e in &entries {
            prop_assert!(after.hull_energy(&e.composition).unwrap() <= before.hull_energy(&e.composition).unwrap() + 1e-12);
        }
        let own = before.hull_energy(&entries[0].composition).unwrap();
        let new_value = after.hull_energy(&entries[0].composition).unwrap();
        if entries[0].energy_per_atom < own - 1e-12 {
            prop_assert!(new_value < own);
        } else {
            prop_assert!((new_value - own).abs() <= 1e-12);
        }
    }
}

#[test]
fn stability_boundaries() {
    let t = Thresholds::default();
    let cases = [
        (-0.01, StabilityLabel::Stable, true),
        (0.0, StabilityLabel::Stable, true),
        (0.05, StabilityLabel::Metastable, true),
        (0.08, StabilityLabel::Metastable, true),
        (0.09, StabilityLabel::Unstable, true),
        (0.1, StabilityLabel::Unstable, true),
        (0.12, StabilityLabel::Unstable, false),
    ];
    for (e, label, ssun) in cases {
        assert_eq!(classify_stability(e, &t), label, "{e}");
        assert_eq!(ssun_eligible(e), ssun, "{e}");
    }
}

#[test]
fn charge_neutrality_examples() {
    let table = OxidationTable::standard();
    let check = |f: &str| compositional_validity(&parse_formula(f).unwrap(), table, MissingPolicy::Strict);
    assert!(check("NaCl"));
    assert!(!check("Na2Cl"));
    assert!(check("Si"));
}

#[test]
fn agreement_example() {
    let pred = [-0.5; 10];
    let reference = [-0.2, -0.1, 0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7];
    let s = agreement_stats(&pred, &reference, 0.0).unwrap();
    assert!((s.precision - 0.3).abs() < 1e-12);
    assert!((s.recall - 1.0).abs() < 1e-12);
    assert!((s.f1 - 0.4615).abs() < 1e-4);
    assert!((s.accuracy - 0.3).abs() < 1e-12);
    assert_eq!((s.true_positives, s.false_positives, s.true_negatives, s.false_negatives), (3, 7, 0, 0));
}
