//! Two-phase dense tableau simplex with Bland's rule.

use super::{BasicSolution, DenseLp, LP_TOL};
use crate::error::{Error, Result};

const MAX_PIVOTS: usize = 200_000;

struct Tableau {
    /// `rows[i]` holds the coefficients followed by the right-hand side.
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> f64 {
        self.rows[i][self.cols]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let inv = 1.0 / self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v *= inv;
        }
        self.rows[r][c] = 1.0;
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let factor = row[c];
            if factor == 0.0 {
                continue;
            }
            for (v, p) in row.iter_mut().zip(&pivot_row) {
                *v -= factor * p;
                if v.abs() < 1e-14 {
                    *v = 0.0;
                }
            }
            row[c] = 0.0;
        }
        self.basis[r] = c;
    }

    fn reduced_cost(&self, cost: &[f64], j: usize) -> f64 {
        let mut d = cost[j];
        for (i, row) in self.rows.iter().enumerate() {
            d -= cost[self.basis[i]] * row[j];
        }
        d
    }

    /// Maximize `cost` over the current tableau, letting only columns with
    /// `enterable(j)` enter. Bland's rule: lowest-index improving column,
    /// ratio ties broken by the lowest-index basic variable.
    fn optimize(&mut self, cost: &[f64], enterable: impl Fn(usize) -> bool) -> Result<()> {
        for _ in 0..MAX_PIVOTS {
            let entering = (0..self.cols)
                .filter(|&j| enterable(j) && !self.basis.contains(&j))
                .find(|&j| self.reduced_cost(cost, j) > LP_TOL);
            let Some(c) = entering else {
                return Ok(());
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows.len() {
                let a = self.rows[i][c];
                if a <= LP_TOL {
                    continue;
                }
                let ratio = self.rhs(i).max(0.0) / a;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((bi, br)) => {
                        let tie = (ratio - br).abs() <= 1e-12 * (1.0 + br.abs());
                        if ratio < br && !tie || tie && self.basis[i] < self.basis[bi] {
                            Some((i, ratio))
                        } else {
                            Some((bi, br))
                        }
                    }
                };
            }
            let Some((r, _)) = leave else {
                return Err(Error::Unbounded);
            };
            self.pivot(r, c);
        }
        Err(Error::Internal(format!("simplex exceeded {MAX_PIVOTS} pivots")))
    }
}

/// Optimal basic feasible solution of `lp`.
///
/// Rows with negative right-hand side are negated and given an artificial
/// variable; equality rows always get one. Phase one minimizes the sum of
/// artificials, artificials left in the basis at zero are pivoted out (or
/// the row is dropped as redundant), and phase two optimizes the objective
/// without letting artificials re-enter.
pub fn solve_basic_optimal(lp: &DenseLp) -> Result<BasicSolution> {
    let n = lp.num_vars();
    let n_le = lp.le_rows().len();
    let m = lp.num_rows();

    let needs_artificial: Vec<bool> = lp
        .le_rows()
        .iter()
        .map(|r| r.rhs < 0.0)
        .chain(lp.eq_rows().iter().map(|_| true))
        .collect();
    let n_art = needs_artificial.iter().filter(|&&a| a).count();
    let art_start = n + n_le;
    let cols = art_start + n_art;

    let mut rows = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut next_art = art_start;
    for (i, con) in lp.le_rows().iter().chain(lp.eq_rows()).enumerate() {
        let mut row = vec![0.0; cols + 1];
        let sign = if con.rhs < 0.0 { -1.0 } else { 1.0 };
        for (j, &a) in con.coeffs.iter().enumerate() {
            row[j] = sign * a;
        }
        if i < n_le {
            row[n + i] = sign;
        }
        row[cols] = sign * con.rhs;
        if needs_artificial[i] {
            row[next_art] = 1.0;
            basis.push(next_art);
            next_art += 1;
        } else {
            basis.push(n + i);
        }
        rows.push(row);
    }
    let mut tab = Tableau { rows, basis, cols };

    if n_art > 0 {
        let mut phase_one = vec![0.0; cols];
        for c in phase_one.iter_mut().skip(art_start) {
            *c = -1.0;
        }
        tab.optimize(&phase_one, |_| true)?;
        let scale = 1.0
            + lp.le_rows()
                .iter()
                .chain(lp.eq_rows())
                .map(|r| r.rhs.abs())
                .fold(0.0, f64::max);
        let residual: f64 = (0..tab.rows.len())
            .filter(|&i| tab.basis[i] >= art_start)
            .map(|i| tab.rhs(i))
            .sum();
        if residual > LP_TOL * scale {
            return Err(Error::Infeasible);
        }
        // drive zero-level artificials out of the basis
        let mut i = 0;
        while i < tab.rows.len() {
            if tab.basis[i] >= art_start {
                let replacement = (0..art_start)
                    .filter(|j| !tab.basis.contains(j))
                    .filter(|&j| tab.rows[i][j].abs() > LP_TOL)
                    .max_by(|&a, &b| tab.rows[i][a].abs().total_cmp(&tab.rows[i][b].abs()));
                match replacement {
                    Some(j) => tab.pivot(i, j),
                    None => {
                        tab.rows.remove(i);
                        tab.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
    }

    let mut cost = vec![0.0; cols];
    cost[..n].copy_from_slice(lp.objective());
    tab.optimize(&cost, |j| j < art_start)?;

    let mut x = vec![0.0; n];
    for (i, &b) in tab.basis.iter().enumerate() {
        if b < n {
            let v = tab.rhs(i);
            x[b] = if v < 0.0 && v > -LP_TOL { 0.0 } else { v };
        }
    }
    Ok(BasicSolution::new(lp, x))
}
