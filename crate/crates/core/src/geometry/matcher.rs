use std::collections::HashMap;

use nalgebra::RowVector3;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use super::distance::PeriodicFrame;
use super::lattice::{det, to_matrix, IntMatrix, Lattice};
use super::primitive::primitive_cell;
use crate::element::Element;
use crate::{Crystal, Exec};

/// Primitive reduction searches internal translations within this fraction
/// of the site tolerance.
pub const PRIMITIVE_TOL_FRACTION: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatchTolerances {
    /// Relative tolerance on cell lengths.
    pub ltol: f64,
    /// Site tolerance in units of `(V / n)^(1/3)`.
    pub stol: f64,
    /// Angle tolerance in degrees.
    pub angle_tol: f64,
}

impl Default for MatchTolerances {
    fn default() -> Self {
        MatchTolerances { ltol: 0.2, stol: 0.3, angle_tol: 5.0 }
    }
}

/// Integer element ratios with common factors removed, ordered by atomic
/// number.
pub type ReducedFormula = Vec<(Element, usize)>;

pub fn reduced_formula(crystal: &Crystal) -> ReducedFormula {
    let mut counts = crystal.element_counts();
    counts.sort();
    let g = counts.iter().fold(0, |g, (_, n)| g.gcd(n));
    counts.into_iter().map(|(e, n)| (e, n / g.max(1))).collect()
}

/// A crystal brought to its primitive Niggli cell, ready for matching.
pub struct Reduced {
    pub formula: ReducedFormula,
    lattice: Lattice,
    frame: PeriodicFrame,
    species: Vec<Element>,
    frac: Vec<[f64; 3]>,
}

impl Reduced {
    pub fn new(crystal: &Crystal, tol: &MatchTolerances) -> Self {
        let l = &crystal.lattice;
        let scale = (l.volume() / crystal.len().max(1) as f64).cbrt();
        let longest = l.a.max(l.b).max(l.c);
        let prim = primitive_cell(crystal, PRIMITIVE_TOL_FRACTION * tol.stol * scale / longest);
        let mut lattice = Lattice::from_params(&prim.lattice);
        let mut frac: Vec<[f64; 3]> = prim.sites.iter().map(|s| s.frac).collect();
        if let Ok(n) = lattice.niggli() {
            let inv = to_matrix(&n.transform).try_inverse().expect("unimodular");
            frac = frac.iter().map(|f| wrap(RowVector3::from(*f) * inv)).collect();
            lattice = n.lattice;
        }
        Reduced {
            formula: reduced_formula(crystal),
            frame: PeriodicFrame::new(&lattice),
            lattice,
            species: prim.sites.iter().map(|s| s.element).collect(),
            frac,
        }
    }

    pub fn len(&self) -> usize {
        self.frac.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frac.is_empty()
    }

    fn volume_per_atom(&self) -> f64 {
        self.lattice.volume() / self.len() as f64
    }
}

fn wrap(v: RowVector3<f64>) -> [f64; 3] {
    [0, 1, 2].map(|k| crate::crystal::wrap01(v[k]))
}

/// Structural equivalence after primitive and Niggli reduction, checked in
/// both directions.
pub fn structures_match(a: &Crystal, b: &Crystal, tol: &MatchTolerances) -> bool {
    reduced_match(&Reduced::new(a, tol), &Reduced::new(b, tol), tol)
}

pub fn reduced_match(a: &Reduced, b: &Reduced, tol: &MatchTolerances) -> bool {
    a.formula == b.formula
        && a.len() == b.len()
        && !a.is_empty()
        && volumes_compatible(a, b, tol)
        && one_way(a, b, tol)
        && one_way(b, a, tol)
}

fn volumes_compatible(a: &Reduced, b: &Reduced, tol: &MatchTolerances) -> bool {
    let (va, vb) = (a.volume_per_atom(), b.volume_per_atom());
    va.max(vb) / va.min(vb) <= (1.0 + tol.ltol).powi(3)
}

/// Some basis of `b`'s lattice resembling `a`'s cell carries every atom of
/// `b` onto a distinct same-element atom of `a`, up to a rigid translation.
fn one_way(a: &Reduced, b: &Reduced, tol: &MatchTolerances) -> bool {
    let target = a.lattice.params();
    let lengths = target.lengths();
    let mut by_axis: [Vec<([i32; 3], RowVector3<f64>)>; 3] = Default::default();
    for i in -2..=2 {
        for j in -2..=2 {
            for k in -2..=2 {
                if (i, j, k) == (0, 0, 0) {
                    continue;
                }
                let v = RowVector3::new(i as f64, j as f64, k as f64) * b.lattice.matrix;
                let len = v.norm();
                for axis in 0..3 {
                    if (len / lengths[axis] - 1.0).abs() <= tol.ltol {
                        by_axis[axis].push(([i, j, k], v));
                    }
                }
            }
        }
    }
    let angle = |u: &RowVector3<f64>, v: &RowVector3<f64>| {
        (u.dot(v) / (u.norm() * v.norm())).clamp(-1.0, 1.0).acos().to_degrees()
    };
    let threshold = tol.stol * (a.lattice.volume() / a.len() as f64).cbrt();
    let anchor = anchor_of(a);

    for (n1, v1) in &by_axis[0] {
        for (n2, v2) in &by_axis[1] {
            if (angle(v1, v2) - target.gamma).abs() > tol.angle_tol {
                continue;
            }
            for (n3, v3) in &by_axis[2] {
                if (angle(v2, v3) - target.alpha).abs() > tol.angle_tol
                    || (angle(v1, v3) - target.beta).abs() > tol.angle_tol
                {
                    continue;
                }
                let n: IntMatrix = [*n1, *n2, *n3];
                if det(&n).abs() != 1 {
                    continue;
                }
                let inv = to_matrix(&n).try_inverse().expect("unimodular");
                let moved: Vec<[f64; 3]> = b.frac.iter().map(|f| wrap(RowVector3::from(*f) * inv)).collect();
                if translation_search(a, &b.species, &moved, anchor, threshold) {
                    return true;
                }
            }
        }
    }
    false
}

fn anchor_of(r: &Reduced) -> Element {
    let mut counts: Vec<(Element, usize)> = Vec::new();
    for e in &r.species {
        match counts.iter_mut().find(|(x, _)| x == e) {
            Some((_, n)) => *n += 1,
            None => counts.push((*e, 1)),
        }
    }
    counts.sort_by_key(|(e, n)| (*n, *e));
    counts[0].0
}

fn translation_search(a: &Reduced, species: &[Element], frac: &[[f64; 3]], anchor: Element, threshold: f64) -> bool {
    let a0 = a.species.iter().position(|e| *e == anchor).expect("anchor present");
    let p0 = a.frac[a0];
    for (q, e) in frac.iter().zip(species) {
        if *e != anchor {
            continue;
        }
        let t = [p0[0] - q[0], p0[1] - q[1], p0[2] - q[2]];
        let shifted: Vec<[f64; 3]> = frac.iter().map(|f| [f[0] + t[0], f[1] + t[1], f[2] + t[2]]).collect();
        if perfect_matching(a, species, &shifted, threshold) {
            return true;
        }
    }
    false
}

/// Kuhn's augmenting-path matching between same-element atoms within
/// `threshold` Å.
fn perfect_matching(a: &Reduced, species: &[Element], frac: &[[f64; 3]], threshold: f64) -> bool {
    let mut adjacency: Vec<Vec<usize>> = Vec::with_capacity(a.len());
    for (i, pa) in a.frac.iter().enumerate() {
        let near: Vec<usize> = (0..frac.len())
            .filter(|&j| species[j] == a.species[i] && a.frame.within(*pa, frac[j], threshold))
            .collect();
        if near.is_empty() {
            return false;
        }
        adjacency.push(near);
    }
    let mut owner: Vec<Option<usize>> = vec![None; frac.len()];
    fn augment(i: usize, adj: &[Vec<usize>], owner: &mut [Option<usize>], seen: &mut [bool]) -> bool {
        for &j in &adj[i] {
            if seen[j] {
                continue;
            }
            seen[j] = true;
            if owner[j].is_none_or(|k| augment(k, adj, owner, seen)) {
                owner[j] = Some(i);
                return true;
            }
        }
        false
    }
    (0..a.len()).all(|i| {
        let mut seen = vec![false; frac.len()];
        augment(i, &adjacency, &mut owner, &mut seen)
    })
}

/// Partition into classes of matching structures (transitive closure).
/// Classes are ordered by their lowest index and list indices ascending.
pub fn dedupe(crystals: &[Crystal], tol: &MatchTolerances, exec: Exec) -> Vec<Vec<usize>> {
    let reduced = exec.map(crystals, |c| Reduced::new(c, tol));
    let mut buckets: HashMap<(&ReducedFormula, usize), Vec<usize>> = HashMap::new();
    for (i, r) in reduced.iter().enumerate() {
        buckets.entry((&r.formula, r.len())).or_default().push(i);
    }
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for members in buckets.values() {
        for (x, &i) in members.iter().enumerate() {
            pairs.extend(members[x + 1..].iter().map(|&j| (i, j)));
        }
    }
    pairs.sort_unstable();
    let matched = exec.map(&pairs, |&(i, j)| reduced_match(&reduced[i], &reduced[j], tol));

    let mut parent: Vec<usize> = (0..crystals.len()).collect();
    fn root(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for (&(i, j), m) in pairs.iter().zip(matched) {
        if m {
            let (ri, rj) = (root(&mut parent, i), root(&mut parent, j));
            parent[ri.max(rj)] = ri.min(rj);
        }
    }
    let mut classes: Vec<Vec<usize>> = Vec::new();
    let mut slot: HashMap<usize, usize> = HashMap::new();
    for i in 0..crystals.len() {
        let r = root(&mut parent, i);
        let k = *slot.entry(r).or_insert_with(|| {
            classes.push(Vec::new());
            classes.len() - 1
        });
        classes[k].push(i);
    }
    classes
}
