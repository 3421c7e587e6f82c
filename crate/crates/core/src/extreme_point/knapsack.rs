//! Fractional knapsack where values and sizes may be negative.
//!
//! ```text
//! max Σ v_j z_j   s.t.  Σ s_j z_j <= B,  0 <= z_j <= 1
//! ```
//!
//! A negative-size item sells knapsack space. Items split into four kinds:
//!
//! | kind       | signs                 | treatment                         |
//! |------------|-----------------------|-----------------------------------|
//! | mandatory  | `v > 0, s <= 0`       | always taken                      |
//! | useless    | `v <= 0, s >= 0`      | never taken                       |
//! | positive   | `v > 0, s > 0`        | bought, best `v/s` first          |
//! | negative   | `v <= 0, s < 0`       | space sold, cheapest `v/s` first  |
//!
//! After the mandatory items, the remaining budget may be negative. Space is
//! then bought from the cheapest negative items until the budget is met. The
//! positives fill any slack, and finally positives and negatives are traded
//! pairwise while the value per unit of the best remaining positive is at
//! least the price per unit of the cheapest remaining negative. Each trade
//! step exhausts one of the two items, so at most one item ends fractional.

use super::{DenseLp, LP_TOL};
use crate::error::{invalid, Error, Result};

/// z values this close to 0 or 1 are snapped.
const SNAP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedKnapsackItem {
    pub value: f64,
    pub size: f64,
    pub id: usize,
}

impl SignedKnapsackItem {
    pub fn new(id: usize, value: f64, size: f64) -> Self {
        Self { value, size, id }
    }

    fn density(&self) -> f64 {
        self.value / self.size
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KnapsackSolution {
    /// One entry per input item, in input order.
    pub z: Vec<f64>,
    pub objective: f64,
}

impl KnapsackSolution {
    /// Items with `z` strictly inside `(tol, 1 - tol)`.
    pub fn fractional_count(&self, tol: f64) -> usize {
        self.z.iter().filter(|&&z| z > tol && z < 1.0 - tol).count()
    }
}

/// Optimal solution with at most one fractional item.
pub fn solve_signed_knapsack(items: &[SignedKnapsackItem], budget: f64) -> Result<KnapsackSolution> {
    if !budget.is_finite() || items.iter().any(|it| !it.value.is_finite() || !it.size.is_finite()) {
        return Err(invalid("knapsack values, sizes and budget must be finite"));
    }
    let mut z = vec![0.0; items.len()];
    let mut cap = budget;
    let mut positive = Vec::new();
    let mut negative = Vec::new();
    for (j, it) in items.iter().enumerate() {
        match (it.value > 0.0, it.size) {
            (true, s) if s <= 0.0 => {
                z[j] = 1.0;
                cap -= s;
            }
            (true, _) => positive.push(j),
            (false, s) if s < 0.0 => negative.push(j),
            (false, _) => {}
        }
    }
    positive.sort_by(|&a, &b| {
        items[b]
            .density()
            .total_cmp(&items[a].density())
            .then(items[a].id.cmp(&items[b].id))
    });
    negative.sort_by(|&a, &b| {
        // v <= 0 and s < 0, so v/s >= 0 is the price per unit of space
        (items[a].density() + 0.0)
            .total_cmp(&(items[b].density() + 0.0))
            .then(items[a].id.cmp(&items[b].id))
    });

    let (mut pi, mut ni) = (0, 0);

    // buy space until the budget is met
    while cap < 0.0 && ni < negative.len() {
        let j = negative[ni];
        let supply = -items[j].size * (1.0 - z[j]);
        if supply <= -cap {
            z[j] = 1.0;
            cap += supply;
            ni += 1;
        } else {
            z[j] += -cap / -items[j].size;
            cap = 0.0;
            ni += snap(&mut z[j]) as usize;
        }
    }
    if cap < -LP_TOL * (1.0 + budget.abs()) {
        return Err(Error::Infeasible);
    }
    cap = cap.max(0.0);

    // fill with the densest positives
    while cap > 0.0 && pi < positive.len() {
        let j = positive[pi];
        let need = items[j].size * (1.0 - z[j]);
        if need <= cap {
            z[j] = 1.0;
            cap -= need;
            pi += 1;
        } else {
            z[j] += cap / items[j].size;
            cap = 0.0;
            pi += snap(&mut z[j]) as usize;
        }
    }

    // trade space: sell from negatives, spend on positives
    while pi < positive.len() && ni < negative.len() {
        let p = positive[pi];
        let q = negative[ni];
        if items[p].density() < items[q].density() {
            break;
        }
        let need = items[p].size * (1.0 - z[p]);
        let supply = -items[q].size * (1.0 - z[q]);
        if need <= supply {
            z[p] = 1.0;
            pi += 1;
            z[q] += need / -items[q].size;
            ni += snap(&mut z[q]) as usize;
        } else {
            z[q] = 1.0;
            ni += 1;
            z[p] += supply / items[p].size;
            pi += snap(&mut z[p]) as usize;
        }
    }

    let objective = items.iter().zip(&z).map(|(it, z)| it.value * z).sum();
    Ok(KnapsackSolution { z, objective })
}

/// Snap a value near 0 or 1; returns true if it ended at 1.
fn snap(z: &mut f64) -> bool {
    if *z >= 1.0 - SNAP {
        *z = 1.0;
        true
    } else {
        if *z <= SNAP {
            *z = 0.0;
        }
        false
    }
}

/// The same problem as a [`DenseLp`]: one budget row and one `z_j <= 1` row
/// per item.
pub fn knapsack_lp(items: &[SignedKnapsackItem], budget: f64) -> DenseLp {
    let m = items.len();
    let mut lp = DenseLp::new(m)
        .with_objective(items.iter().map(|it| it.value).collect())
        .expect("width matches");
    lp.add_le(items.iter().map(|it| it.size).collect(), budget)
        .expect("width matches");
    for j in 0..m {
        let mut row = vec![0.0; m];
        row[j] = 1.0;
        lp.add_le(row, 1.0).expect("width matches");
    }
    lp
}
