//! Dense two-phase simplex with Bland's rule.
//!
//! Small problems only: the tableau is stored densely and every pivot touches
//! all of it.

use crate::error::{Error, Result};

const EPS: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Le,
    Eq,
    Ge,
}

/// `min c.x` subject to `rows` and `x >= 0`.
#[derive(Debug, Clone, Default)]
pub struct LinearProgram {
    pub c: Vec<f64>,
    pub rows: Vec<(Vec<f64>, Cmp, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    /// Largest constraint violation at `x`.
    pub residual: f64,
}

impl LinearProgram {
    pub fn new(c: Vec<f64>) -> Self {
        LinearProgram { c, rows: Vec::new() }
    }

    pub fn num_vars(&self) -> usize {
        self.c.len()
    }

    pub fn add(&mut self, coeffs: Vec<f64>, cmp: Cmp, rhs: f64) {
        assert_eq!(coeffs.len(), self.c.len(), "row width");
        self.rows.push((coeffs, cmp, rhs));
    }

    /// Sparse form of [`add`](Self::add).
    pub fn add_sparse(&mut self, terms: &[(usize, f64)], cmp: Cmp, rhs: f64) {
        let mut row = vec![0.0; self.c.len()];
        for &(j, v) in terms {
            row[j] += v;
        }
        self.add(row, cmp, rhs);
    }

    /// Largest violation of any constraint or bound at `x`.
    pub fn residual(&self, x: &[f64]) -> f64 {
        let mut worst = x.iter().map(|v| (-v).max(0.0)).fold(0.0, f64::max);
        for (a, cmp, b) in &self.rows {
            let lhs: f64 = a.iter().zip(x).map(|(a, x)| a * x).sum();
            let v = match cmp {
                Cmp::Le => (lhs - b).max(0.0),
                Cmp::Ge => (b - lhs).max(0.0),
                Cmp::Eq => (lhs - b).abs(),
            };
            worst = worst.max(v);
        }
        worst
    }

    pub fn solve(&self) -> Result<LpSolution> {
        Tableau::build(self).solve(self)
    }
}

struct Tableau {
    /// `m` constraint rows followed by the objective row; last column is the rhs.
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    n: usize,
    n_slack: usize,
    n_art: usize,
    iterations: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Self {
        let n = lp.num_vars();
        let m = lp.rows.len();
        let n_slack = lp.rows.iter().filter(|r| r.1 != Cmp::Eq).count();
        let n_art = m;
        let width = n + n_slack + n_art + 1;
        let mut t = vec![vec![0.0; width]; m + 1];
        let mut basis = Vec::with_capacity(m);
        let mut slack = n;
        for (i, (a, cmp, b)) in lp.rows.iter().enumerate() {
            let sign = if *b < 0.0 { -1.0 } else { 1.0 };
            for j in 0..n {
                t[i][j] = sign * a[j];
            }
            match cmp {
                Cmp::Le => {
                    t[i][slack] = sign;
                    slack += 1;
                }
                Cmp::Ge => {
                    t[i][slack] = -sign;
                    slack += 1;
                }
                Cmp::Eq => {}
            }
            t[i][n + n_slack + i] = 1.0;
            t[i][width - 1] = sign * b;
            basis.push(n + n_slack + i);
        }
        Tableau {
            t,
            basis,
            n,
            n_slack,
            n_art,
            iterations: 0,
        }
    }

    fn m(&self) -> usize {
        self.basis.len()
    }

    fn width(&self) -> usize {
        self.n + self.n_slack + self.n_art + 1
    }

    fn is_art(&self, j: usize) -> bool {
        j >= self.n + self.n_slack && j < self.width() - 1
    }

    /// Writes reduced costs of `cost` (per column) into the objective row.
    fn price(&mut self, cost: &[f64]) {
        let m = self.m();
        let w = self.width();
        let mut obj = vec![0.0; w];
        obj[..cost.len()].copy_from_slice(cost);
        for i in 0..m {
            let cb = cost.get(self.basis[i]).copied().unwrap_or(0.0);
            if cb != 0.0 {
                for j in 0..w {
                    obj[j] -= cb * self.t[i][j];
                }
            }
        }
        self.t[m] = obj;
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.width();
        let p = self.t[r][c];
        for j in 0..w {
            self.t[r][j] /= p;
        }
        let row = self.t[r].clone();
        for (i, ti) in self.t.iter_mut().enumerate() {
            if i != r {
                let f = ti[c];
                if f != 0.0 {
                    for j in 0..w {
                        ti[j] -= f * row[j];
                    }
                    ti[c] = 0.0;
                }
            }
        }
        self.basis[r] = c;
        self.iterations += 1;
    }

    /// Minimizes the priced objective over columns allowed by `allow`.
    fn run(&mut self, allow: impl Fn(usize) -> bool) -> Result<()> {
        let m = self.m();
        let rhs = self.width() - 1;
        loop {
            // Bland: lowest-index entering column with negative reduced cost.
            let Some(c) = (0..rhs).find(|&j| allow(j) && self.t[m][j] < -EPS) else {
                return Ok(());
            };
            let mut best: Option<(f64, usize)> = None;
            for i in 0..m {
                let a = self.t[i][c];
                if a > EPS {
                    let ratio = self.t[i][rhs] / a;
                    best = match best {
                        None => Some((ratio, i)),
                        Some((br, bi)) => {
                            if ratio < br - EPS || (ratio <= br + EPS && self.basis[i] < self.basis[bi]) {
                                Some((ratio, i))
                            } else {
                                Some((br, bi))
                            }
                        }
                    };
                }
            }
            let Some((_, r)) = best else {
                return Err(Error::Lp("unbounded"));
            };
            self.pivot(r, c);
        }
    }

    fn solve(mut self, lp: &LinearProgram) -> Result<LpSolution> {
        let m = self.m();
        let w = self.width();
        let rhs = w - 1;
        let mut phase1 = vec![0.0; w - 1];
        for j in self.n + self.n_slack..w - 1 {
            phase1[j] = 1.0;
        }
        self.price(&phase1);
        self.run(|_| true)?;
        let infeasibility = -self.t[m][rhs];
        let scale = 1.0 + lp.rows.iter().map(|r| r.2.abs()).fold(0.0, f64::max);
        if infeasibility > 1e-9 * scale {
            return Err(Error::Lp("infeasible"));
        }
        // Drive remaining (zero-level) artificials out of the basis.
        for i in 0..m {
            if self.is_art(self.basis[i]) {
                if let Some(c) = (0..self.n + self.n_slack).find(|&j| self.t[i][j].abs() > EPS) {
                    self.pivot(i, c);
                }
            }
        }
        let mut cost = lp.c.clone();
        cost.resize(w - 1, 0.0);
        self.price(&cost);
        let n_real = self.n + self.n_slack;
        self.run(|j| j < n_real)?;
        let mut x = vec![0.0; self.n];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.n {
                x[b] = self.t[i][rhs].max(0.0);
            }
        }
        let objective = lp.c.iter().zip(&x).map(|(c, x)| c * x).sum();
        Ok(LpSolution {
            residual: lp.residual(&x),
            x,
            objective,
            iterations: self.iterations,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn textbook_maximization() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36
        let mut lp = LinearProgram::new(vec![-3.0, -5.0]);
        lp.add(vec![1.0, 0.0], Cmp::Le, 4.0);
        lp.add(vec![0.0, 2.0], Cmp::Le, 12.0);
        lp.add(vec![3.0, 2.0], Cmp::Le, 18.0);
        let s = lp.solve().unwrap();
        assert_abs_diff_eq!(s.objective, -36.0, epsilon = 1e-9);
        assert_abs_diff_eq!(s.x[0], 2.0, epsilon = 1e-9);
        assert_abs_diff_eq!(s.x[1], 6.0, epsilon = 1e-9);
        assert!(s.residual < 1e-9);
    }

    #[test]
    fn equality_and_ge_rows() {
        // min x + 2y + 3z, x + y + z = 10, y >= 3, z >= 1 -> 6 + 6 + 3
        let mut lp = LinearProgram::new(vec![1.0, 2.0, 3.0]);
        lp.add(vec![1.0, 1.0, 1.0], Cmp::Eq, 10.0);
        lp.add_sparse(&[(1, 1.0)], Cmp::Ge, 3.0);
        lp.add_sparse(&[(2, 1.0)], Cmp::Ge, 1.0);
        let s = lp.solve().unwrap();
        assert_abs_diff_eq!(s.objective, 15.0, epsilon = 1e-9);
    }

    #[test]
    fn negative_rhs_is_flipped() {
        // -x <= -2  <=>  x >= 2
        let mut lp = LinearProgram::new(vec![1.0]);
        lp.add(vec![-1.0], Cmp::Le, -2.0);
        assert_abs_diff_eq!(lp.solve().unwrap().x[0], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn reports_infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(vec![1.0]);
        lp.add(vec![1.0], Cmp::Le, 1.0);
        lp.add(vec![1.0], Cmp::Ge, 2.0);
        assert!(matches!(lp.solve(), Err(Error::Lp("infeasible"))));
        let mut lp = LinearProgram::new(vec![-1.0, 0.0]);
        lp.add(vec![1.0, -1.0], Cmp::Le, 1.0);
        assert!(matches!(lp.solve(), Err(Error::Lp("unbounded"))));
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = LinearProgram::new(vec![1.0, 1.0]);
        lp.add(vec![1.0, 1.0], Cmp::Eq, 2.0);
        lp.add(vec![2.0, 2.0], Cmp::Eq, 4.0);
        let s = lp.solve().unwrap();
        assert_abs_diff_eq!(s.objective, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn degenerate_cycling_example() {
        // Beale's example cycles under Dantzig's rule; Bland terminates.
        let mut lp = LinearProgram::new(vec![-0.75, 150.0, -0.02, 6.0]);
        lp.add(vec![0.25, -60.0, -0.04, 9.0], Cmp::Le, 0.0);
        lp.add(vec![0.5, -90.0, -0.02, 3.0], Cmp::Le, 0.0);
        lp.add(vec![0.0, 0.0, 1.0, 0.0], Cmp::Le, 1.0);
        let s = lp.solve().unwrap();
        assert_abs_diff_eq!(s.objective, -0.05, epsilon = 1e-9);
    }
}
