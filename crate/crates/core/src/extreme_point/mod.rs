//! Solvers that return extreme-point (basic feasible) optimal solutions.
//!
//! Extreme points are what keep the algorithms' distributions small: a basic
//! solution of an LP with `r` constraint rows has at most `r` nonzero
//! variables, so each iteration adds at most `r` tuples.

mod knapsack;
mod simplex;
mod vertices;

pub use knapsack::{knapsack_lp, solve_signed_knapsack, KnapsackSolution, SignedKnapsackItem};
pub use simplex::solve_basic_optimal;
pub use vertices::{enumerate_vertices, MAX_ENUMERATION_SIZE};

use crate::distribution::PROB_FLOOR;
use crate::error::{invalid, Result};

/// Pivot and feasibility tolerance shared by the solvers.
pub const LP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub rhs: f64,
}

/// `max c·x` subject to `A_le x <= b_le`, `A_eq x = b_eq`, `x >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLp {
    num_vars: usize,
    objective: Vec<f64>,
    le_rows: Vec<Constraint>,
    eq_rows: Vec<Constraint>,
}

impl DenseLp {
    /// Zero objective, no rows.
    pub fn new(num_vars: usize) -> Self {
        Self {
            num_vars,
            objective: vec![0.0; num_vars],
            le_rows: Vec::new(),
            eq_rows: Vec::new(),
        }
    }

    pub fn with_objective(mut self, objective: Vec<f64>) -> Result<Self> {
        self.check_width(&objective)?;
        self.objective = objective;
        Ok(self)
    }

    pub fn add_le(&mut self, coeffs: Vec<f64>, rhs: f64) -> Result<()> {
        self.check_width(&coeffs)?;
        self.le_rows.push(Constraint { coeffs, rhs });
        Ok(())
    }

    pub fn add_eq(&mut self, coeffs: Vec<f64>, rhs: f64) -> Result<()> {
        self.check_width(&coeffs)?;
        self.eq_rows.push(Constraint { coeffs, rhs });
        Ok(())
    }

    fn check_width(&self, row: &[f64]) -> Result<()> {
        if row.len() != self.num_vars {
            return Err(invalid(format!(
                "row has {} coefficients, LP has {} variables",
                row.len(),
                self.num_vars
            )));
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(invalid("LP coefficients must be finite"));
        }
        Ok(())
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_rows(&self) -> usize {
        self.le_rows.len() + self.eq_rows.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn le_rows(&self) -> &[Constraint] {
        &self.le_rows
    }

    pub fn eq_rows(&self) -> &[Constraint] {
        &self.eq_rows
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        dot(&self.objective, x)
    }

    /// Largest violation of any row or sign constraint at `x` (0 if feasible).
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst = x.iter().map(|&v| (-v).max(0.0)).fold(0.0, f64::max);
        for row in &self.le_rows {
            worst = worst.max(dot(&row.coeffs, x) - row.rhs);
        }
        for row in &self.eq_rows {
            worst = worst.max((dot(&row.coeffs, x) - row.rhs).abs());
        }
        worst
    }
}

/// An optimal basic feasible solution.
#[derive(Debug, Clone, PartialEq)]
pub struct BasicSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub nonzero_count: usize,
}

impl BasicSolution {
    pub(crate) fn new(lp: &DenseLp, x: Vec<f64>) -> Self {
        let nonzero_count = x.iter().filter(|&&v| v > PROB_FLOOR).count();
        Self {
            objective: lp.objective_value(&x),
            x,
            nonzero_count,
        }
    }
}

/// Anything that can produce an optimal extreme point of a [`DenseLp`].
pub trait LpSolver: Sync {
    fn solve(&self, lp: &DenseLp) -> Result<BasicSolution>;
}

/// The two-phase dense simplex ([`solve_basic_optimal`]).
#[derive(Debug, Clone, Copy, Default)]
pub struct Simplex;

impl LpSolver for Simplex {
    fn solve(&self, lp: &DenseLp) -> Result<BasicSolution> {
        solve_basic_optimal(lp)
    }
}

/// Exhaustive basis enumeration ([`enumerate_vertices`]); small LPs only.
#[derive(Debug, Clone, Copy, Default)]
pub struct VertexEnumeration;

impl LpSolver for VertexEnumeration {
    fn solve(&self, lp: &DenseLp) -> Result<BasicSolution> {
        enumerate_vertices(lp)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_ragged_rows() {
        let mut lp = DenseLp::new(2);
        assert!(lp.add_le(vec![1.0], 1.0).is_err());
        assert!(lp.add_eq(vec![1.0, f64::INFINITY], 1.0).is_err());
        assert!(DenseLp::new(2).with_objective(vec![1.0; 3]).is_err());
    }

    #[test]
    fn violation() {
        let mut lp = DenseLp::new(2);
        lp.add_le(vec![1.0, 1.0], 1.0).unwrap();
        lp.add_eq(vec![1.0, -1.0], 0.0).unwrap();
        assert_eq!(lp.max_violation(&[0.5, 0.5]), 0.0);
        assert!((lp.max_violation(&[1.0, 0.5]) - 0.5).abs() < 1e-12);
        assert_eq!(lp.max_violation(&[-0.25, -0.25]), 0.25);
    }
}
