use nalgebra::{Matrix3, RowVector3};
use thiserror::Error;

use crate::LatticeParams;

/// Cell vectors as the rows of a 3×3 matrix in Å.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lattice {
    pub matrix: Matrix3<f64>,
}

pub type IntMatrix = [[i32; 3]; 3];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NiggliError {
    #[error("Niggli reduction did not converge within {0} iterations")]
    NoConvergence(usize),
    #[error("lattice is degenerate")]
    Degenerate,
}

pub struct Niggli {
    pub lattice: Lattice,
    /// Rows of the reduced cell as integer combinations of the input rows.
    pub transform: IntMatrix,
}

pub const NIGGLI_MAX_ITERATIONS: usize = 100;

impl Lattice {
    /// `a` along x, `b` in the xy-plane, `c` completing a right-handed cell.
    pub fn from_params(p: &LatticeParams) -> Self {
        let [ca, cb, cg] = p.angles().map(|t| t.to_radians().cos());
        let sg = p.gamma.to_radians().sin();
        let cy = (ca - cb * cg) / sg;
        let cz = (1.0 - cb * cb - cy * cy).max(0.0).sqrt();
        Lattice {
            matrix: Matrix3::new(p.a, 0.0, 0.0, p.b * cg, p.b * sg, 0.0, p.c * cb, p.c * cy, p.c * cz),
        }
    }

    pub fn from_rows(rows: [[f64; 3]; 3]) -> Self {
        Lattice { matrix: Matrix3::from_fn(|i, j| rows[i][j]) }
    }

    pub fn row(&self, i: usize) -> RowVector3<f64> {
        self.matrix.row(i).into_owned()
    }

    pub fn params(&self) -> LatticeParams {
        let [a, b, c] = [0, 1, 2].map(|i| self.row(i).norm());
        let angle = |i: usize, j: usize, li: f64, lj: f64| {
            (self.row(i).dot(&self.row(j)) / (li * lj)).clamp(-1.0, 1.0).acos().to_degrees()
        };
        LatticeParams::new(a, b, c, angle(1, 2, b, c), angle(0, 2, a, c), angle(0, 1, a, b))
    }

    pub fn volume(&self) -> f64 {
        self.matrix.determinant().abs()
    }

    pub fn metric(&self) -> Matrix3<f64> {
        self.matrix * self.matrix.transpose()
    }

    pub fn to_cartesian(&self, frac: [f64; 3]) -> RowVector3<f64> {
        RowVector3::from(frac) * self.matrix
    }

    /// Basis change by an integer matrix whose rows give the new vectors.
    pub fn transformed(&self, t: &IntMatrix) -> Lattice {
        Lattice { matrix: to_matrix(t) * self.matrix }
    }

    /// Krivy–Gruber reduction to the Niggli cell.
    pub fn niggli(&self) -> Result<Niggli, NiggliError> {
        let volume = self.volume();
        if !(volume.is_finite() && volume > 1e-12) {
            return Err(NiggliError::Degenerate);
        }
        let eps = 1e-5 * volume.cbrt();
        let mut total: IntMatrix = IDENTITY;
        let mut basis = self.matrix;
        let apply = |t: IntMatrix, basis: &mut Matrix3<f64>, total: &mut IntMatrix| {
            *basis = to_matrix(&t) * *basis;
            *total = mul(&t, total);
        };
        for _ in 0..NIGGLI_MAX_ITERATIONS {
            let g = basis * basis.transpose();
            let (a, b, c) = (g[(0, 0)], g[(1, 1)], g[(2, 2)]);
            let (xi, eta, zeta) = (2.0 * g[(1, 2)], 2.0 * g[(0, 2)], 2.0 * g[(0, 1)]);
            let sign = |x: f64| if x < -eps { -1 } else if x > eps { 1 } else { 0 };

            if a > b + eps || ((a - b).abs() <= eps && xi.abs() > eta.abs() + eps) {
                apply([[0, -1, 0], [-1, 0, 0], [0, 0, -1]], &mut basis, &mut total);
                continue;
            }
            if b > c + eps || ((b - c).abs() <= eps && eta.abs() > zeta.abs() + eps) {
                apply([[-1, 0, 0], [0, 0, -1], [0, -1, 0]], &mut basis, &mut total);
                continue;
            }
            let (l, m, n) = (sign(xi), sign(eta), sign(zeta));
            if l * m * n == 1 {
                let f = |s: i32| if s == -1 { -1 } else { 1 };
                let d = [f(l), f(m), f(n)];
                if d != [1, 1, 1] {
                    apply(diag(d), &mut basis, &mut total);
                }
            } else {
                let mut d = [1, 1, 1];
                let mut zero_slot = None;
                for (k, s) in [l, m, n].into_iter().enumerate() {
                    match s {
                        1 => d[k] = -1,
                        0 => zero_slot = Some(k),
                        _ => {}
                    }
                }
                if d[0] * d[1] * d[2] < 0 {
                    if let Some(k) = zero_slot {
                        d[k] = -1;
                    }
                }
                if d != [1, 1, 1] && d[0] * d[1] * d[2] > 0 {
                    apply(diag(d), &mut basis, &mut total);
                }
            }
            let g = basis * basis.transpose();
            let (a, b) = (g[(0, 0)], g[(1, 1)]);
            let (xi, eta, zeta) = (2.0 * g[(1, 2)], 2.0 * g[(0, 2)], 2.0 * g[(0, 1)]);
            let s = |x: f64| if x < 0.0 { -1 } else { 1 };

            if xi.abs() > b + eps
                || ((xi - b).abs() <= eps && 2.0 * eta < zeta - eps)
                || ((xi + b).abs() <= eps && zeta < -eps)
            {
                apply([[1, 0, 0], [0, 1, 0], [0, -s(xi), 1]], &mut basis, &mut total);
                continue;
            }
            if eta.abs() > a + eps
                || ((eta - a).abs() <= eps && 2.0 * xi < zeta - eps)
                || ((eta + a).abs() <= eps && zeta < -eps)
            {
                apply([[1, 0, 0], [0, 1, 0], [-s(eta), 0, 1]], &mut basis, &mut total);
                continue;
            }
            if zeta.abs() > a + eps
                || ((zeta - a).abs() <= eps && 2.0 * xi < eta - eps)
                || ((zeta + a).abs() <= eps && eta < -eps)
            {
                apply([[1, 0, 0], [-s(zeta), 1, 0], [0, 0, 1]], &mut basis, &mut total);
                continue;
            }
            let sum = xi + eta + zeta + a + b;
            if sum < -eps || (sum.abs() <= eps && 2.0 * (a + eta) + zeta > eps) {
                apply([[1, 0, 0], [0, 1, 0], [1, 1, 1]], &mut basis, &mut total);
                continue;
            }
            return Ok(Niggli { lattice: Lattice { matrix: basis }, transform: total });
        }
        Err(NiggliError::NoConvergence(NIGGLI_MAX_ITERATIONS))
    }
}

pub(crate) const IDENTITY: IntMatrix = [[1, 0, 0], [0, 1, 0], [0, 0, 1]];

fn diag(d: [i32; 3]) -> IntMatrix {
    [[d[0], 0, 0], [0, d[1], 0], [0, 0, d[2]]]
}

pub(crate) fn to_matrix(t: &IntMatrix) -> Matrix3<f64> {
    Matrix3::from_fn(|i, j| t[i][j] as f64)
}

pub(crate) fn mul(a: &IntMatrix, b: &IntMatrix) -> IntMatrix {
    let mut out = [[0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

pub(crate) fn det(m: &IntMatrix) -> i32 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}
