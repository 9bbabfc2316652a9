//! Tolerance-based space-group detection in the crystal's own basis.
//!
//! The crystal's symmetry operations are found first: every database
//! rotation that preserves the metric is paired with the translations that
//! carry one anchor atom onto atoms of the same element. Groups are then
//! scanned from highest order down; a group is accepted when some origin
//! shift `s` turns each of its operations `(R, t)` into `(R, t + (I - R) s)`
//! and every shifted operation maps the atom set onto itself.

use std::collections::HashSet;

use super::database::{det_i, IntMatrix, SpaceGroup, SpaceGroupDb, IDENTITY};
use super::solve::{max_wrapped_distance, wrapped_delta};
use super::triplet::{rank, Q};
use crate::crystal::{wrap01, Crystal, LatticeParams};
use crate::element::Element;

/// Relative length tolerance of the metric pre-filter.
pub const METRIC_LENGTH_TOL: f64 = 1e-3;
/// Angle tolerance (degrees) of the metric pre-filter.
pub const METRIC_ANGLE_TOL: f64 = 0.5;
/// Groups needing more origin-shift candidates than this are skipped.
pub const MAX_SHIFT_CANDIDATES: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub number: u16,
    /// Shift `s` such that the crystal translated by `-s` is invariant under
    /// the group's tabulated operations.
    pub origin_shift: [f64; 3],
}

/// Highest-order space group of `crystal` at fractional tolerance `sym_tol`,
/// using the shipped database.
pub fn detect_spacegroup(crystal: &Crystal, sym_tol: f64) -> u16 {
    SpaceGroupDb::standard().detect(crystal, sym_tol).number
}

/// Atoms grouped by element, each group binned on a periodic grid whose
/// cells are at least `tol` wide so that a lookup only visits neighbours.
struct AtomSet {
    groups: Vec<(Element, Vec<[f64; 3]>)>,
    bins: Vec<Vec<Vec<usize>>>,
    cells: usize,
    tol: f64,
}

impl AtomSet {
    fn new(crystal: &Crystal, tol: f64) -> Self {
        let mut groups: Vec<(Element, Vec<[f64; 3]>)> = Vec::new();
        for s in &crystal.sites {
            match groups.iter_mut().find(|(e, _)| *e == s.element) {
                Some((_, v)) => v.push(s.frac),
                None => groups.push((s.element, vec![s.frac])),
            }
        }
        let cells = ((1.0 / tol.max(1e-9)).floor() as usize).clamp(1, 24);
        let bins = groups
            .iter()
            .map(|(_, pts)| {
                let mut b = vec![Vec::new(); cells.pow(3)];
                for (i, p) in pts.iter().enumerate() {
                    b[Self::cell_of(*p, cells)].push(i);
                }
                b
            })
            .collect();
        AtomSet { groups, bins, cells, tol }
    }

    fn cell_of(p: [f64; 3], cells: usize) -> usize {
        let c = p.map(|v| ((wrap01(v) * cells as f64) as usize).min(cells - 1));
        (c[0] * cells + c[1]) * cells + c[2]
    }

    fn anchor(&self) -> &[[f64; 3]] {
        let (_, pts) = self
            .groups
            .iter()
            .min_by(|a, b| a.1.len().cmp(&b.1.len()).then(a.0.cmp(&b.0)))
            .expect("non-empty crystal");
        pts
    }

    fn contains(&self, group: usize, q: [f64; 3]) -> bool {
        let pts = &self.groups[group].1;
        let m = self.cells;
        if m < 3 {
            return pts.iter().any(|&p| max_wrapped_distance(p, q) <= self.tol);
        }
        let c = q.map(|v| ((wrap01(v) * m as f64) as usize).min(m - 1));
        for dx in [m - 1, 0, 1] {
            for dy in [m - 1, 0, 1] {
                for dz in [m - 1, 0, 1] {
                    let cell = (((c[0] + dx) % m) * m + (c[1] + dy) % m) * m + (c[2] + dz) % m;
                    if self.bins[group][cell].iter().any(|&i| max_wrapped_distance(pts[i], q) <= self.tol) {
                        return true;
                    }
                }
            }
        }
        false
    }

    fn maps_onto(&self, rot: &IntMatrix, t: [f64; 3]) -> bool {
        self.groups
            .iter()
            .enumerate()
            .all(|(g, (_, pts))| pts.iter().all(|&p| self.contains(g, apply(rot, t, p))))
    }
}

fn apply(rot: &IntMatrix, t: [f64; 3], p: [f64; 3]) -> [f64; 3] {
    let mut out = t;
    for i in 0..3 {
        for j in 0..3 {
            out[i] += rot[i][j] as f64 * p[j];
        }
    }
    out
}

fn metric_preserved(lattice: &LatticeParams, rot: &IntMatrix) -> bool {
    let g = lattice.metric();
    let mut rg = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            // (R^T G R)_ij
            let mut v = 0.0;
            for k in 0..3 {
                for l in 0..3 {
                    v += rot[k][i] as f64 * g[k][l] * rot[l][j] as f64;
                }
            }
            rg[i][j] = v;
        }
    }
    let len = |m: &[[f64; 3]; 3], i: usize| m[i][i].sqrt();
    for i in 0..3 {
        if (len(&rg, i) - len(&g, i)).abs() > METRIC_LENGTH_TOL * len(&g, i) {
            return false;
        }
    }
    for (i, j) in [(1, 2), (0, 2), (0, 1)] {
        let a0 = (g[i][j] / (len(&g, i) * len(&g, j))).clamp(-1.0, 1.0).acos().to_degrees();
        let a1 = (rg[i][j] / (len(&rg, i) * len(&rg, j))).clamp(-1.0, 1.0).acos().to_degrees();
        if (a0 - a1).abs() > METRIC_ANGLE_TOL {
            return false;
        }
    }
    true
}

/// Operations of the crystal itself, indexed by database rotation id.
struct CrystalSymmetry {
    translations: Vec<Vec<[f64; 3]>>,
}

impl CrystalSymmetry {
    fn find(db: &SpaceGroupDb, crystal: &Crystal, atoms: &AtomSet, tol: f64) -> Self {
        let anchor = atoms.anchor();
        let p0 = anchor[0];
        let translations = db
            .rotations
            .iter()
            .map(|rot| {
                if !metric_preserved(&crystal.lattice, rot) {
                    return Vec::new();
                }
                let rp0 = apply(rot, [0.0; 3], p0);
                let mut found: Vec<[f64; 3]> = Vec::new();
                for &pj in anchor {
                    let t = [0, 1, 2].map(|i| wrap01(pj[i] - rp0[i]));
                    if found.iter().any(|f| max_wrapped_distance(*f, t) <= tol) {
                        continue;
                    }
                    if atoms.maps_onto(rot, t) {
                        found.push(t);
                    }
                }
                found
            })
            .collect();
        CrystalSymmetry { translations }
    }
}

impl SpaceGroupDb {
    /// Detect the space group of `crystal`.
    ///
    /// Returns the group of highest order (ties: larger number) whose
    /// operations, after a common origin shift, map the labelled atoms onto
    /// themselves within `sym_tol` and whose rotations preserve the lattice
    /// metric. Falls back to P1.
    pub fn detect(&self, crystal: &Crystal, sym_tol: f64) -> Detection {
        let fallback = Detection { number: 1, origin_shift: [0.0; 3] };
        if crystal.is_empty() {
            return fallback;
        }
        let atoms = AtomSet::new(crystal, sym_tol);
        let sym = CrystalSymmetry::find(self, crystal, &atoms, sym_tol);
        let n_translations = self.rotations.iter().position(|r| *r == IDENTITY).map_or(1, |i| sym.translations[i].len());
        for &gi in &self.detection_order {
            let group = &self.groups()[gi];
            if group.rotation_ids.iter().any(|&r| sym.translations[r].is_empty())
                || group.centering_multiplicity() > n_translations
            {
                continue;
            }
            let Some(shifts) = origin_shift_candidates(group, &sym) else {
                continue;
            };
            for s in shifts {
                if shift_is_valid(group, &sym, &atoms, s, sym_tol) {
                    return Detection { number: group.number, origin_shift: s };
                }
            }
        }
        fallback
    }
}

fn shifted_translation(rot: &IntMatrix, t: [f64; 3], s: [f64; 3]) -> [f64; 3] {
    let rs = apply(rot, [0.0; 3], s);
    [0, 1, 2].map(|i| wrap01(t[i] + s[i] - rs[i]))
}

fn shift_is_valid(group: &SpaceGroup, sym: &CrystalSymmetry, atoms: &AtomSet, s: [f64; 3], tol: f64) -> bool {
    let cheap = group.ops.iter().zip(&group.rotation_ids).all(|(op, &rid)| {
        let t = shifted_translation(op.rotation(), op.translation_f64(), s);
        sym.translations[rid].iter().any(|c| max_wrapped_distance(*c, t) <= 2.0 * tol)
    });
    cheap
        && group.ops.iter().all(|op| {
            let t = shifted_translation(op.rotation(), op.translation_f64(), s);
            atoms.maps_onto(op.rotation(), t)
        })
}

/// Candidate origin shifts for `group`, closest to the origin first.
///
/// Each operation `(R, t)` matched to a crystal translation `c` requires
/// `(I - R) s ≡ c - t (mod 1)`. Three independent rows of these congruences
/// (padded with `s_k = 0` along directions no rotation constrains) are
/// solved exactly for every coset of the integer system.
fn origin_shift_candidates(group: &SpaceGroup, sym: &CrystalSymmetry) -> Option<Vec<[f64; 3]>> {
    let mut rows: Vec<([i32; 3], usize, usize)> = Vec::new();
    let as_q = |rows: &[[i32; 3]]| rows.iter().map(|r| r.iter().map(|&v| Q::from_integer(v as i64)).collect()).collect::<Vec<Vec<Q>>>();
    'ops: for (oi, op) in group.ops.iter().enumerate() {
        let r = op.rotation();
        for i in 0..3 {
            let row = [0, 1, 2].map(|j| (i == j) as i32 - r[i][j]);
            if row.iter().all(|v| *v == 0) {
                continue;
            }
            let mut trial: Vec<[i32; 3]> = rows.iter().map(|x| x.0).collect();
            trial.push(row);
            if rank(&as_q(&trial)) == trial.len() {
                rows.push((row, oi, i));
                if rows.len() == 3 {
                    break 'ops;
                }
            }
        }
    }
    let mut used_ops: Vec<usize> = rows.iter().map(|r| r.1).collect();
    used_ops.dedup();

    let choices: Vec<&[[f64; 3]]> =
        used_ops.iter().map(|&oi| sym.translations[group.rotation_ids[oi]].as_slice()).collect();

    let mut matrix: Vec<[i32; 3]> = rows.iter().map(|r| r.0).collect();
    for k in 0..3 {
        if matrix.len() == 3 {
            break;
        }
        let mut unit = [0; 3];
        unit[k] = 1;
        let mut trial = matrix.clone();
        trial.push(unit);
        if rank(&as_q(&trial)) == trial.len() {
            matrix = trial;
        }
    }
    let a: IntMatrix = [matrix[0], matrix[1], matrix[2]];
    let det = det_i(&a);
    let period = det.unsigned_abs() as usize;
    let inv = inverse_f64(&a, det);

    let n_combos: usize = choices.iter().map(|c| c.len()).product();
    if n_combos.saturating_mul(period.pow(3)) > MAX_SHIFT_CANDIDATES * 64 {
        return None;
    }
    let mut out: Vec<[f64; 3]> = Vec::new();
    let mut seen: HashSet<[i64; 3]> = HashSet::new();
    for combo in 0..n_combos {
        let mut code = combo;
        let picked: Vec<[f64; 3]> = choices
            .iter()
            .map(|c| {
                let t = c[code % c.len()];
                code /= c.len();
                t
            })
            .collect();
        let mut b = [0.0; 3];
        for (k, (_, oi, i)) in rows.iter().enumerate() {
            let slot = used_ops.iter().position(|u| u == oi).unwrap();
            b[k] = picked[slot][*i] - group.ops[*oi].translation_f64()[*i];
        }
        for n in 0..period.pow(3) {
            let shift = [0, 1, 2].map(|k| b[k] + ((n / period.pow(k as u32)) % period) as f64);
            let s = [0, 1, 2].map(|i| wrap01((0..3).map(|j| inv[i][j] * shift[j]).sum::<f64>()));
            let cell = s.map(|v| ((v * 1e5).round() as i64).rem_euclid(100_000));
            if seen.insert(cell) {
                out.push(s);
                if out.len() > MAX_SHIFT_CANDIDATES {
                    return None;
                }
            }
        }
    }
    let key = |s: &[f64; 3]| s.iter().map(|v| wrapped_delta(*v).powi(2)).sum::<f64>();
    out.sort_by(|x, y| key(x).total_cmp(&key(y)).then(x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal)));
    Some(out)
}

fn inverse_f64(m: &IntMatrix, det: i32) -> [[f64; 3]; 3] {
    let d = det as f64;
    let c = |r0: usize, c0: usize, r1: usize, c1: usize| (m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0]) as f64;
    [
        [c(1, 1, 2, 2) / d, -c(0, 1, 2, 2) / d, c(0, 1, 1, 2) / d],
        [-c(1, 0, 2, 2) / d, c(0, 0, 2, 2) / d, -c(0, 0, 1, 2) / d],
        [c(1, 0, 2, 1) / d, -c(0, 0, 2, 1) / d, c(0, 0, 1, 1) / d],
    ]
}
