//! Dense two-phase simplex with Bland's rule for
//! `min c·x  s.t.  A x = b, x >= 0` with `b >= 0`.

const PIVOT_EPS: f64 = 1e-12;
const FEASIBLE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { value: f64, x: Vec<f64> },
    Infeasible,
    Unbounded,
}

struct Tableau {
    /// `rows × (cols + 1)`, the last column is the right-hand side.
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.t[row][col];
        for v in self.t[row].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.t[row].clone();
        for (r, line) in self.t.iter_mut().enumerate() {
            if r == row {
                continue;
            }
            let f = line[col];
            if f != 0.0 {
                for (v, pv) in line.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
            }
        }
        self.basis[row] = col;
    }

    /// Minimise `cost` over the columns allowed by `enterable`.
    fn optimise(&mut self, cost: &[f64], enterable: impl Fn(usize) -> bool) -> Result<(), ()> {
        let rhs = cost.len();
        loop {
            let reduced = |j: usize| cost[j] - self.basis.iter().enumerate().map(|(r, &b)| cost[b] * self.t[r][j]).sum::<f64>();
            let entering = (0..rhs).find(|&j| enterable(j) && !self.basis.contains(&j) && reduced(j) < -PIVOT_EPS);
            let Some(col) = entering else {
                return Ok(());
            };
            let mut leave: Option<(f64, usize, usize)> = None;
            for r in 0..self.t.len() {
                let a = self.t[r][col];
                if a > PIVOT_EPS {
                    let ratio = self.t[r][rhs] / a;
                    let better = match leave {
                        None => true,
                        Some((best, _, basic)) => {
                            ratio < best - PIVOT_EPS || ((ratio - best).abs() <= PIVOT_EPS && self.basis[r] < basic)
                        }
                    };
                    if better {
                        leave = Some((ratio, r, self.basis[r]));
                    }
                }
            }
            let Some((_, row, _)) = leave else {
                return Err(());
            };
            self.pivot(row, col);
        }
    }
}

pub fn solve(cost: &[f64], a: &[Vec<f64>], b: &[f64]) -> LpOutcome {
    let (m, n) = (a.len(), cost.len());
    // columns: n structural, m artificial, then rhs
    let mut t = vec![vec![0.0; n + m + 1]; m];
    for r in 0..m {
        let sign = if b[r] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            t[r][j] = sign * a[r][j];
        }
        t[r][n + r] = 1.0;
        t[r][n + m] = sign * b[r];
    }
    let mut tab = Tableau { t, basis: (n..n + m).collect() };

    let phase1: Vec<f64> = (0..n + m).map(|j| if j >= n { 1.0 } else { 0.0 }).collect();
    if tab.optimise(&phase1, |_| true).is_err() {
        return LpOutcome::Infeasible;
    }
    let infeasibility: f64 = tab.basis.iter().enumerate().filter(|(_, &b)| b >= n).map(|(r, _)| tab.t[r][n + m]).sum();
    if infeasibility > FEASIBLE_EPS {
        return LpOutcome::Infeasible;
    }
    for r in 0..m {
        if tab.basis[r] >= n {
            if let Some(col) = (0..n).find(|&j| tab.t[r][j].abs() > PIVOT_EPS && !tab.basis.contains(&j)) {
                tab.pivot(r, col);
            }
        }
    }

    let phase2: Vec<f64> = (0..n + m).map(|j| if j < n { cost[j] } else { 0.0 }).collect();
    if tab.optimise(&phase2, |j| j < n).is_err() {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![0.0; n];
    for (r, &bcol) in tab.basis.iter().enumerate() {
        if bcol < n {
            x[bcol] = tab.t[r][n + m];
        }
    }
    let value = x.iter().zip(cost).map(|(xi, ci)| xi * ci).sum();
    LpOutcome::Optimal { value, x }
}
