//! Brute-force vertex enumeration, the reference the simplex and knapsack
//! solvers are tested against.

use super::{BasicSolution, DenseLp, LP_TOL};
use crate::error::{Error, Result};

/// Limit on `variables + rows`.
pub const MAX_ENUMERATION_SIZE: usize = 24;

/// Best basic feasible solution found by trying every basis.
///
/// The LP is put in equality form with one slack per `<=` row, dependent
/// rows are eliminated, and every choice of `rank` columns is solved
/// directly. Assumes the LP is bounded; an unbounded LP returns its best
/// vertex.
pub fn enumerate_vertices(lp: &DenseLp) -> Result<BasicSolution> {
    let n = lp.num_vars();
    let size = n + lp.num_rows();
    if size > MAX_ENUMERATION_SIZE {
        return Err(Error::Capacity {
            what: "variables + rows for vertex enumeration",
            got: size,
            limit: MAX_ENUMERATION_SIZE,
        });
    }
    let n_le = lp.le_rows().len();
    let cols = n + n_le;

    let mut system: Vec<Vec<f64>> = Vec::new();
    for (i, con) in lp.le_rows().iter().chain(lp.eq_rows()).enumerate() {
        let mut row = vec![0.0; cols + 1];
        row[..n].copy_from_slice(&con.coeffs);
        if i < n_le {
            row[n + i] = 1.0;
        }
        row[cols] = con.rhs;
        system.push(row);
    }
    let system = independent_rows(system, cols)?;
    let rank = system.len();

    let mut best: Option<(f64, Vec<f64>)> = None;
    for basis in Combinations::new(cols, rank) {
        let Some(values) = solve_square(&system, &basis, cols) else {
            continue;
        };
        if values.iter().any(|&v| v < -LP_TOL) {
            continue;
        }
        let mut x = vec![0.0; n];
        for (&col, &v) in basis.iter().zip(&values) {
            if col < n {
                x[col] = v.max(0.0);
            }
        }
        let obj = lp.objective_value(&x);
        if best.as_ref().is_none_or(|(b, _)| obj > b + 1e-12) {
            best = Some((obj, x));
        }
    }
    match best {
        Some((_, x)) => Ok(BasicSolution::new(lp, x)),
        None => Err(Error::Infeasible),
    }
}

/// Row-reduce `[A | b]`, returning the nonzero rows, or `Infeasible` if a
/// row reduces to `0 = c` with `c != 0`.
fn independent_rows(mut rows: Vec<Vec<f64>>, cols: usize) -> Result<Vec<Vec<f64>>> {
    let mut rank = 0;
    for c in 0..cols {
        if rank == rows.len() {
            break;
        }
        let pivot = (rank..rows.len()).max_by(|&a, &b| rows[a][c].abs().total_cmp(&rows[b][c].abs()));
        let Some(p) = pivot else { break };
        if rows[p][c].abs() <= 1e-10 {
            continue;
        }
        rows.swap(rank, p);
        let inv = 1.0 / rows[rank][c];
        for v in rows[rank].iter_mut() {
            *v *= inv;
        }
        let pivot_row = rows[rank].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != rank && row[c] != 0.0 {
                let f = row[c];
                for (v, p) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * p;
                }
            }
        }
        rank += 1;
    }
    if rows[rank..].iter().any(|r| r[cols].abs() > LP_TOL) {
        return Err(Error::Infeasible);
    }
    rows.truncate(rank);
    Ok(rows)
}

/// Solve the square system restricted to `basis` columns by Gaussian
/// elimination with partial pivoting. `None` when singular.
fn solve_square(system: &[Vec<f64>], basis: &[usize], cols: usize) -> Option<Vec<f64>> {
    let m = basis.len();
    let mut a: Vec<Vec<f64>> = system
        .iter()
        .map(|row| {
            let mut r: Vec<f64> = basis.iter().map(|&c| row[c]).collect();
            r.push(row[cols]);
            r
        })
        .collect();
    for c in 0..m {
        let p = (c..m).max_by(|&x, &y| a[x][c].abs().total_cmp(&a[y][c].abs()))?;
        if a[p][c].abs() <= 1e-10 {
            return None;
        }
        a.swap(c, p);
        for r in c + 1..m {
            let f = a[r][c] / a[c][c];
            if f != 0.0 {
                for k in c..=m {
                    a[r][k] -= f * a[c][k];
                }
            }
        }
    }
    let mut x = vec![0.0; m];
    for c in (0..m).rev() {
        let mut v = a[c][m];
        for k in c + 1..m {
            v -= a[c][k] * x[k];
        }
        x[c] = v / a[c][c];
    }
    Some(x)
}

/// Lexicographic k-subsets of `0..n`.
struct Combinations {
    n: usize,
    idx: Vec<usize>,
    done: bool,
}

impl Combinations {
    fn new(n: usize, k: usize) -> Self {
        Self {
            n,
            idx: (0..k).collect(),
            done: k > n,
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.idx.clone();
        let k = self.idx.len();
        let mut i = k;
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.idx[i] < self.n - k + i {
                self.idx[i] += 1;
                for j in i + 1..k {
                    self.idx[j] = self.idx[j - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    }
}
