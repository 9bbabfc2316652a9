use nalgebra::Matrix3;

use super::lattice::{to_matrix, Lattice};
use crate::{Crystal, LatticeParams};

/// Shortest allowed distance between atoms, Å.
pub const MIN_PAIR_DISTANCE: f64 = 0.5;

/// Periodic distances evaluated in the Niggli-reduced basis of a lattice.
///
/// Differences are wrapped into `[-0.5, 0.5)` in the reduced basis and the
/// neighbouring images `{-1, 0, 1}³` are scanned; cells whose reduced angles
/// leave `[60°, 120°]` scan `{-2..2}³`.
pub struct PeriodicFrame {
    reduced: [[f64; 3]; 3],
    to_reduced: [[f64; 3]; 3],
    /// Cartesian image offsets, shortest first.
    images: Vec<[f64; 3]>,
}

fn row_times(v: [f64; 3], m: &[[f64; 3]; 3]) -> [f64; 3] {
    [0, 1, 2].map(|j| v[0] * m[0][j] + v[1] * m[1][j] + v[2] * m[2][j])
}

fn to_array(m: &Matrix3<f64>) -> [[f64; 3]; 3] {
    [0, 1, 2].map(|i| [0, 1, 2].map(|j| m[(i, j)]))
}

impl PeriodicFrame {
    pub fn new(lattice: &Lattice) -> Self {
        let (reduced, to_reduced, range) = match lattice.niggli() {
            Ok(n) => {
                let inv = to_matrix(&n.transform).try_inverse().expect("unimodular");
                let skewed = n.lattice.params().angles().iter().any(|a| !(60.0..=120.0).contains(a));
                (n.lattice.matrix, inv, if skewed { 2 } else { 1 })
            }
            Err(_) => (lattice.matrix, Matrix3::identity(), 3),
        };
        let reduced = to_array(&reduced);
        let mut images = Vec::new();
        for i in -range..=range {
            for j in -range..=range {
                for k in -range..=range {
                    images.push(row_times([i as f64, j as f64, k as f64], &reduced));
                }
            }
        }
        let norm2 = |v: &[f64; 3]| v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
        images.sort_by(|a, b| norm2(a).total_cmp(&norm2(b)));
        PeriodicFrame { reduced, to_reduced: to_array(&to_reduced), images }
    }

    fn base(&self, p: [f64; 3], q: [f64; 3]) -> [f64; 3] {
        let d = row_times([q[0] - p[0], q[1] - p[1], q[2] - p[2]], &self.to_reduced).map(|x| x - x.round());
        row_times(d, &self.reduced)
    }

    /// Minimum distance between `p` and any lattice image of `q`, Å.
    pub fn distance(&self, p: [f64; 3], q: [f64; 3]) -> f64 {
        let c = self.base(p, q);
        self.images
            .iter()
            .map(|v| (c[0] + v[0]).powi(2) + (c[1] + v[1]).powi(2) + (c[2] + v[2]).powi(2))
            .fold(f64::INFINITY, f64::min)
            .sqrt()
    }

    /// Whether some image of `q` lies within `radius` of `p`.
    pub fn within(&self, p: [f64; 3], q: [f64; 3], radius: f64) -> bool {
        let c = self.base(p, q);
        let r2 = radius * radius;
        self.images.iter().any(|v| (c[0] + v[0]).powi(2) + (c[1] + v[1]).powi(2) + (c[2] + v[2]).powi(2) <= r2)
    }

    /// Length of the shortest non-zero lattice vector.
    pub fn shortest_vector(&self) -> f64 {
        self.images
            .iter()
            .map(|v| (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt())
            .find(|n| *n > 1e-12)
            .unwrap_or(f64::INFINITY)
    }
}

pub fn min_image_distance(lattice: &LatticeParams, p: [f64; 3], q: [f64; 3]) -> f64 {
    PeriodicFrame::new(&Lattice::from_params(lattice)).distance(p, q)
}

/// No two atoms, and no atom and its own periodic image, closer than
/// [`MIN_PAIR_DISTANCE`].
pub fn structural_validity(crystal: &Crystal) -> bool {
    let frame = PeriodicFrame::new(&Lattice::from_params(&crystal.lattice));
    if crystal.is_empty() {
        return true;
    }
    if frame.shortest_vector() < MIN_PAIR_DISTANCE {
        return false;
    }
    let sites = &crystal.sites;
    (0..sites.len())
        .all(|i| (i + 1..sites.len()).all(|j| frame.distance(sites[i].frac, sites[j].frac) >= MIN_PAIR_DISTANCE))
}
