use num_traits::{Signed, Zero};

use super::triplet::{to_f64, AffineMap, Q};
use crate::crystal::wrap01;

/// Precomputed inversion data for solving `M u + c ≡ p (mod 1)` for the
/// free parameters `u` of a site expression.
#[derive(Debug, Clone)]
pub(crate) struct ExprSolver {
    rows: Vec<usize>,
    cols: Vec<usize>,
    inverse: Vec<Vec<f64>>,
    period: usize,
}

fn det(m: &[Vec<Q>]) -> Q {
    match m.len() {
        0 => Q::from_integer(1),
        1 => m[0][0],
        2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
        _ => {
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
        }
    }
}

fn subsets(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for (i, &x) in items.iter().enumerate() {
        for mut rest in subsets(&items[i + 1..], k - 1) {
            rest.insert(0, x);
            out.push(rest);
        }
    }
    out
}

fn invert(m: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m.iter().cloned().collect();
    let mut inv: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        a.swap(c, p);
        inv.swap(c, p);
        let piv = a[c][c];
        for k in 0..n {
            a[c][k] /= piv;
            inv[c][k] /= piv;
        }
        for i in 0..n {
            if i != c {
                let f = a[i][c];
                for k in 0..n {
                    a[i][k] -= f * a[c][k];
                    inv[i][k] -= f * inv[c][k];
                }
            }
        }
    }
    inv
}

impl ExprSolver {
    pub(crate) fn new(expr: &AffineMap) -> Self {
        let r = expr.rank();
        let used: Vec<usize> = (0..3).filter(|&j| (0..3).any(|i| !expr.matrix[i][j].is_zero())).collect();
        let mut best: Option<(Q, Vec<usize>, Vec<usize>)> = None;
        for rows in subsets(&[0, 1, 2], r) {
            for cols in subsets(&used, r) {
                let sub: Vec<Vec<Q>> = rows.iter().map(|&i| cols.iter().map(|&j| expr.matrix[i][j]).collect()).collect();
                let d = det(&sub).abs();
                if d.is_zero() {
                    continue;
                }
                if best.as_ref().is_none_or(|(bd, _, _)| d < *bd) {
                    best = Some((d, rows.clone(), cols.clone()));
                }
            }
        }
        let (d, rows, cols) = best.unwrap_or((Q::from_integer(1), Vec::new(), Vec::new()));
        let sub: Vec<Vec<f64>> =
            rows.iter().map(|&i| cols.iter().map(|&j| to_f64(expr.matrix[i][j])).collect()).collect();
        let period = (to_f64(d).ceil() as usize).max(1);
        ExprSolver { inverse: invert(&sub), rows, cols, period }
    }

    pub(crate) fn solve(&self, expr: &AffineMap, point: [f64; 3], tol: f64) -> Option<[f64; 3]> {
        let r = self.rows.len();
        let rhs: Vec<f64> = self.rows.iter().map(|&i| point[i] - to_f64(expr.offset[i])).collect();
        let mut best: Option<(f64, [f64; 3])> = None;
        let combos = self.period.pow(r as u32);
        for code in 0..combos {
            // integer shifts n_l in [0, period) select the solution coset
            let shifted: Vec<f64> = rhs
                .iter()
                .enumerate()
                .map(|(l, v)| v + ((code / self.period.pow(l as u32)) % self.period) as f64)
                .collect();
            let mut u = [0.0; 3];
            for (k, &col) in self.cols.iter().enumerate() {
                u[col] = self.inverse[k].iter().zip(&shifted).map(|(a, b)| a * b).sum();
            }
            let q = expr.apply(u);
            let d = max_wrapped_distance(q, point);
            if best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, q));
            }
        }
        best.filter(|(d, _)| *d <= tol).map(|(_, q)| q.map(wrap01))
    }
}

/// Max-norm of the fractional difference `a - b` reduced to `[-0.5, 0.5)`.
pub(crate) fn max_wrapped_distance(a: [f64; 3], b: [f64; 3]) -> f64 {
    (0..3).map(|i| wrapped_delta(a[i] - b[i]).abs()).fold(0.0, f64::max)
}

pub(crate) fn wrapped_delta(d: f64) -> f64 {
    d - d.round()
}
