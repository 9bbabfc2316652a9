use nalgebra::{Matrix3, RowVector3};

use super::lattice::Lattice;
use crate::element::Element;
use crate::symcore::max_wrapped_distance;
use crate::{Crystal, Site};

/// Pure translations (in `[0, 1)`, zero first) that map the crystal onto
/// itself within `tol`, fractional max-norm.
pub fn internal_translations(crystal: &Crystal, tol: f64) -> Vec<[f64; 3]> {
    let mut out = vec![[0.0; 3]];
    let Some(anchor) = anchor_element(crystal) else {
        return out;
    };
    let anchors: Vec<[f64; 3]> =
        crystal.sites.iter().filter(|s| s.element == anchor).map(|s| s.frac).collect();
    let p0 = anchors[0];
    for q in &anchors[1..] {
        let t = [0, 1, 2].map(|k| crate::crystal::wrap01(q[k] - p0[k]));
        if out.iter().any(|o| max_wrapped_distance(*o, t) <= tol) {
            continue;
        }
        if maps_onto(crystal, t, tol) {
            out.push(t);
        }
    }
    out
}

/// Least frequent element, ties broken by atomic number.
fn anchor_element(crystal: &Crystal) -> Option<Element> {
    let mut counts = crystal.element_counts();
    counts.sort_by_key(|(e, n)| (*n, *e));
    counts.first().map(|(e, _)| *e)
}

fn maps_onto(crystal: &Crystal, t: [f64; 3], tol: f64) -> bool {
    crystal.sites.iter().all(|s| {
        let moved = [s.frac[0] + t[0], s.frac[1] + t[1], s.frac[2] + t[2]];
        crystal.sites.iter().any(|o| o.element == s.element && max_wrapped_distance(o.frac, moved) <= tol)
    })
}

/// The smallest cell of which `crystal` is a supercell within `tol`
/// (fractional, in the input cell). Returns the input unchanged when it has
/// no internal translation or the translations are inconsistent.
pub fn primitive_cell(crystal: &Crystal, tol: f64) -> Crystal {
    let translations = internal_translations(crystal, tol);
    let n_cells = translations.len();
    if n_cells == 1 || crystal.len() % n_cells != 0 {
        return crystal.clone();
    }
    let lattice = Lattice::from_params(&crystal.lattice);
    let Some(basis) = primitive_basis(&translations, &lattice) else {
        return crystal.clone();
    };

    let mut covered = vec![false; crystal.len()];
    let mut kept = Vec::new();
    for (i, s) in crystal.sites.iter().enumerate() {
        if covered[i] {
            continue;
        }
        kept.push(i);
        for t in &translations {
            let moved = [s.frac[0] + t[0], s.frac[1] + t[1], s.frac[2] + t[2]];
            for (j, o) in crystal.sites.iter().enumerate() {
                if !covered[j] && o.element == s.element && max_wrapped_distance(o.frac, moved) <= tol {
                    covered[j] = true;
                    break;
                }
            }
        }
    }
    if kept.len() * n_cells != crystal.len() {
        return crystal.clone();
    }
    let to_new = basis.try_inverse().expect("non-singular basis");
    let sites = kept
        .iter()
        .map(|&i| {
            let s = &crystal.sites[i];
            let f = RowVector3::from(s.frac) * to_new;
            Site::new(s.element, [f[0], f[1], f[2]])
        })
        .collect();
    let new_lattice = Lattice { matrix: basis * lattice.matrix };
    Crystal::new(new_lattice.params(), sites).unwrap_or_else(|_| crystal.clone())
}

/// Three lattice vectors (fractional rows) spanning the translation lattice,
/// chosen among the translations and the unit vectors with the smallest
/// total Cartesian length, oriented right-handed.
fn primitive_basis(translations: &[[f64; 3]], lattice: &Lattice) -> Option<Matrix3<f64>> {
    let target = 1.0 / translations.len() as f64;
    let mut candidates: Vec<RowVector3<f64>> = translations[1..].iter().map(|t| RowVector3::from(*t)).collect();
    for k in 0..3 {
        let mut e = RowVector3::zeros();
        e[k] = 1.0;
        candidates.push(e);
    }
    let norm = |v: &RowVector3<f64>| (v * lattice.matrix).norm();
    let mut best: Option<(f64, Matrix3<f64>)> = None;
    for i in 0..candidates.len() {
        for j in i + 1..candidates.len() {
            for k in j + 1..candidates.len() {
                let m = Matrix3::from_rows(&[candidates[i], candidates[j], candidates[k]]);
                let d = m.determinant();
                if (d.abs() - target).abs() > 1e-6 * target {
                    continue;
                }
                let cost = norm(&candidates[i]) + norm(&candidates[j]) + norm(&candidates[k]);
                if best.as_ref().is_none_or(|(c, _)| cost < c - 1e-9) {
                    let mut m = m;
                    if d < 0.0 {
                        m.set_row(2, &(-m.row(2)));
                    }
                    best = Some((cost, m));
                }
            }
        }
    }
    best.map(|(_, m)| m)
}
