//! An instance on which the cardinality algorithm can end at `1/e + O(1/k)`.
//!
//! The ground set is `O ∪ Y` with `|O| = |Y| = k`; elements `0..k` are `O`
//! and `k..2k` are `Y`. With `x = |S∩O|/k` and `y = |S∩Y|/k`,
//!
//! ```text
//! f(S) = x (1 - y) + (g(y) + ℓ y / k) (1 - x)
//! g(x) = (x - 1) ln(1 - x)   for x <= 1 - 1/e,   1/e otherwise
//! ```
//!
//! `f(O) = 1` while every subset of `Y` is worth at most `1/e + ℓ/k`. Every
//! `Y` element looks at least as good as every `O` element in expectation,
//! and one optimal extreme point of each iteration LP moves the distribution
//! along the cyclic family `D(z)` with `z_i = 1 - (1 - 1/k)^i`, never
//! touching `O`. [`adversarial_run`] installs that extreme point each
//! iteration and checks every step of the argument numerically.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::card::{apply_solution, ell_index, lp_violation, select_m, x_index, SetValues};
use crate::distribution::{Distribution, PROB_FLOOR};
use crate::error::{invalid, Error, Result};
use crate::oracle::{SetFunction, ValueOracle};
use crate::set::{ElementSet, MAX_ELEMENTS};

pub const DEFAULT_ELL: f64 = 17.0;

/// Per-tuple tolerance when comparing a distribution to `D(z)`.
pub const DIST_TOL: f64 = 1e-7;

const E_INV: f64 = 0.367_879_441_171_442_33;

pub fn g(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(invalid(format!("g is defined on [0, 1], got {x}")));
    }
    Ok(g_unchecked(x))
}

fn g_unchecked(x: f64) -> f64 {
    if x <= 1.0 - E_INV {
        (x - 1.0) * (1.0 - x).ln()
    } else {
        E_INV
    }
}

/// `f` in terms of the fractions `x = |S∩O|/k` and `y = |S∩Y|/k`.
pub fn tight_value(x: f64, y: f64, k: usize, ell: f64) -> f64 {
    x * (1.0 - y) + (g_unchecked(y) + ell * y / k as f64) * (1.0 - x)
}

/// `f(S)` for a subset of the `2k` elements.
pub fn tight_f(s: &ElementSet, k: usize, ell: f64) -> f64 {
    let o = (0..k).filter(|&u| s.contains(u)).count();
    let y = (k..2 * k).filter(|&u| s.contains(u)).count();
    tight_value(o as f64 / k as f64, y as f64 / k as f64, k, ell)
}

/// `f(S + u) - f(S)` for `u ∈ Y \ S`.
pub fn marginal_y(y: f64, x: f64, k: usize, ell: f64) -> f64 {
    let kf = k as f64;
    let step = (y + 1.0 / kf).min(1.0);
    -x / kf + (1.0 - x) * (g_unchecked(step) - g_unchecked(y) + ell / (kf * kf))
}

/// `f(S + u) - f(S)` for `u ∈ O \ S`.
pub fn marginal_o(y: f64, _x: f64, k: usize, ell: f64) -> f64 {
    let kf = k as f64;
    ((1.0 - y) - (g_unchecked(y) + ell * y / kf)) / kf
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TightFunction {
    k: usize,
    ell: f64,
    o: ElementSet,
    y: ElementSet,
}

impl TightFunction {
    pub fn new(k: usize, ell: f64) -> Result<Self> {
        if k == 0 || 2 * k > MAX_ELEMENTS {
            return Err(Error::Capacity {
                what: "tight instance size k",
                got: k,
                limit: MAX_ELEMENTS / 2,
            });
        }
        if !ell.is_finite() || ell < 0.0 {
            return Err(invalid(format!("ℓ must be a non-negative real, got {ell}")));
        }
        Ok(Self {
            k,
            ell,
            o: ElementSet::full(k),
            y: ElementSet::full(2 * k).difference(&ElementSet::full(k)),
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn ell(&self) -> f64 {
        self.ell
    }

    pub fn o(&self) -> ElementSet {
        self.o
    }

    pub fn y(&self) -> ElementSet {
        self.y
    }
}

impl SetFunction for TightFunction {
    fn ground_size(&self) -> usize {
        2 * self.k
    }

    fn value(&self, set: &ElementSet) -> f64 {
        let kf = self.k as f64;
        let x = set.intersection(&self.o).len() as f64 / kf;
        let y = set.intersection(&self.y).len() as f64 / kf;
        tight_value(x, y, self.k, self.ell)
    }
}

/// `⌊kz⌋`, treating values within `1e-9` of an integer as that integer.
fn snapped_floor(kz: f64) -> usize {
    let r = kz.round();
    if (kz - r).abs() < 1e-9 {
        r as usize
    } else {
        kz.floor() as usize
    }
}

/// `t` consecutive `Y` elements starting at `u_j`, cyclically.
fn cyclic_run(j: usize, t: usize, k: usize) -> ElementSet {
    (0..t).map(|s| k + (j + s) % k).collect()
}

/// The `2k` tuples of `D(z)` before merging: `(S^L_j, S^S_j)` for each `j`.
fn cyclic_copies(z: f64, k: usize) -> Vec<(f64, ElementSet, f64, ElementSet)> {
    let kf = k as f64;
    let fl = snapped_floor(kf * z);
    let p_large = (z - fl as f64 / kf).max(0.0);
    let p_small = ((fl + 1) as f64 / kf - z).max(0.0);
    (0..k)
        .map(|j| {
            let large = if fl < k {
                cyclic_run(j, fl + 1, k)
            } else {
                ElementSet::EMPTY
            };
            (p_large, large, p_small, cyclic_run(j, fl.min(k), k))
        })
        .collect()
}

/// `D(z)`: cyclic runs of `Y` of size `⌊kz⌋ + 1` (each with probability
/// `z - ⌊kz⌋/k`) and `⌊kz⌋` (each with probability `(⌊kz⌋ + 1)/k - z`),
/// merged.
pub fn dist_z(z: f64, k: usize) -> Result<Distribution<ElementSet>> {
    if !(0.0..=1.0).contains(&z) {
        return Err(invalid(format!("z must lie in [0, 1], got {z}")));
    }
    if k == 0 || 2 * k > MAX_ELEMENTS {
        return Err(invalid(format!("k must lie in 1..={}, got {k}", MAX_ELEMENTS / 2)));
    }
    let mut tuples = Vec::with_capacity(2 * k);
    for (pl, large, ps, small) in cyclic_copies(z, k) {
        if pl > PROB_FLOOR {
            tuples.push((pl, large));
        }
        if ps > PROB_FLOOR {
            tuples.push((ps, small));
        }
    }
    Ok(Distribution::from_tuples_unchecked(tuples).unify())
}

/// Largest per-state probability difference between two distributions.
pub fn max_deviation(a: &Distribution<ElementSet>, b: &Distribution<ElementSet>) -> f64 {
    let mut diff: BTreeMap<ElementSet, f64> = BTreeMap::new();
    for t in a.iter() {
        *diff.entry(t.state).or_insert(0.0) += t.p;
    }
    for t in b.iter() {
        *diff.entry(t.state).or_insert(0.0) -= t.p;
    }
    diff.values().fold(0.0, |m, d| m.max(d.abs()))
}

/// `z_i = 1 - (1 - 1/k)^i`.
pub fn z_at(i: usize, k: usize) -> f64 {
    1.0 - (1.0 - 1.0 / k as f64).powi(i as i32)
}

/// The adversarial basic solution for iteration `i`, in the column layout of
/// [`build_lp`] over `dist` with candidates `Y` in index order. Returns the
/// point and which case of the construction applied (1: `⌊kz⌋` unchanged,
/// 2: it grew by one).
pub fn installed_solution(dist: &Distribution<ElementSet>, i: usize, k: usize) -> Result<(Vec<f64>, u8)> {
    let kf = k as f64;
    let (z_prev, z_cur) = (z_at(i - 1, k), z_at(i, k));
    let fl = snapped_floor(kf * z_prev);
    let fl_cur = snapped_floor(kf * z_cur);
    let case = match fl_cur.checked_sub(fl) {
        Some(0) => 1,
        Some(1) => 2,
        _ => {
            return Err(Error::AdversarialTrace {
                iteration: i,
                reason: format!("⌊kz⌋ jumped from {fl} to {fl_cur}"),
            })
        }
    };

    // mass moved along (element, source state), before normalizing by Pr[S]
    let mut mass: BTreeMap<(usize, ElementSet), f64> = BTreeMap::new();
    for (j, (pl, large, ps, small)) in cyclic_copies(z_prev, k).into_iter().enumerate() {
        let first = k + (j + fl) % k;
        if case == 1 {
            if ps > PROB_FLOOR {
                *mass.entry((first, small)).or_insert(0.0) += z_cur - z_prev;
            }
        } else {
            if ps > PROB_FLOOR {
                *mass.entry((first, small)).or_insert(0.0) += ps;
            }
            if pl > PROB_FLOOR {
                let second = k + (j + fl + 1) % k;
                *mass.entry((second, large)).or_insert(0.0) += (kf * z_prev - z_prev - fl as f64) / kf;
            }
        }
    }

    let m = dist.len();
    let index: BTreeMap<ElementSet, usize> = dist.iter().enumerate().map(|(j, t)| (t.state, j)).collect();
    let mut x = vec![0.0; k * m + m];
    for ((u, s), w) in mass {
        let Some(&j) = index.get(&s) else {
            return Err(Error::AdversarialTrace {
                iteration: i,
                reason: format!("state {s} carries moved mass but is not in the support"),
            });
        };
        x[x_index(u - k, j, m)] += w / dist.tuples()[j].p;
    }
    for j in 0..m {
        let moved: f64 = (0..k).map(|ui| x[x_index(ui, j, m)]).sum();
        x[ell_index(j, m, k)] = (1.0 - moved).max(0.0);
    }
    Ok((x, case))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub z: f64,
    pub case: u8,
    pub support: usize,
    /// `min_{u∈Y} E[f(u|S)] - max_{u∈O} E[f(u|S)]` before the update.
    pub gap: f64,
    pub expected_value: f64,
    /// Largest per-state deviation of `D_i` from `D(z_i)`.
    pub max_deviation: f64,
}

#[derive(Debug, Clone)]
pub struct TightRun {
    pub k: usize,
    pub ell: f64,
    pub dist: Distribution<ElementSet>,
    /// Best value in the final support.
    pub value: f64,
    pub solution: ElementSet,
    pub trace: Vec<TraceRow>,
}

/// Run the cardinality algorithm on the tight instance, installing the
/// adversarial extreme point each iteration. Fails with
/// [`Error::AdversarialTrace`] if any step of the construction does not hold.
pub fn adversarial_run(k: usize, ell: f64) -> Result<TightRun> {
    if ell < 6.0 * std::f64::consts::E {
        return Err(invalid(format!("ℓ must be at least 6e, got {ell}")));
    }
    if (k as f64) < ell {
        return Err(invalid(format!("k must be at least ℓ = {ell}, got {k}")));
    }
    let func = TightFunction::new(k, ell)?;
    let oracle = ValueOracle::new(func);
    let fail = |iteration: usize, reason: String| Error::AdversarialTrace { iteration, reason };
    let y_elements: Vec<usize> = func.y().iter().collect();
    let mut dist = Distribution::point(ElementSet::EMPTY);
    let mut trace = Vec::with_capacity(k);

    for i in 1..=k {
        let z_prev = z_at(i - 1, k);
        let dev = max_deviation(&dist, &dist_z(z_prev, k)?);
        if dev > DIST_TOL {
            return Err(fail(i, format!("D_{} is {dev:e} away from D(z)", i - 1)));
        }

        let mut values = SetValues::new();
        let cand = select_m(&dist, &oracle, &mut values, k)?;
        let min_y = y_elements
            .iter()
            .map(|&u| cand.expected[u])
            .fold(f64::INFINITY, f64::min);
        let max_o = (0..k).map(|u| cand.expected[u]).fold(f64::NEG_INFINITY, f64::max);
        let gap = min_y - max_o;
        if gap < -1e-9 {
            return Err(fail(i, format!("an O element beats a Y element by {:e}", -gap)));
        }
        let mut chosen = cand.elements.clone();
        chosen.sort_unstable();
        if chosen != y_elements {
            return Err(fail(i, format!("selected {chosen:?} instead of Y")));
        }
        let cand = crate::card::CandidateSet {
            elements: y_elements.clone(),
            ..cand
        };

        let (x, case) = installed_solution(&dist, i, k)?;
        let violation = lp_violation(&dist, &cand.elements, k, &x);
        if violation > 1e-9 {
            return Err(fail(i, format!("installed point violates the LP by {violation:e}")));
        }
        let m = dist.len();
        let target = (1.0 - z_prev) / k as f64;
        for ui in 0..k {
            let used: f64 = dist.iter().enumerate().map(|(j, t)| t.p * x[x_index(ui, j, m)]).sum();
            if (used - target).abs() > 1e-9 {
                return Err(fail(
                    i,
                    format!("row of element {} holds {used}, expected {target}", k + ui),
                ));
            }
        }

        dist = apply_solution(&dist, &y_elements, &x, true);
        let z_cur = z_at(i, k);
        let dev = max_deviation(&dist, &dist_z(z_cur, k)?);
        if dev > DIST_TOL {
            return Err(fail(i, format!("D_{i} is {dev:e} away from D(z_{i})")));
        }
        trace.push(TraceRow {
            iteration: i,
            z: z_cur,
            case,
            support: dist.len(),
            gap,
            expected_value: dist.expectation(|s| func.value(s)),
            max_deviation: dev,
        });
    }

    let mut best = (ElementSet::EMPTY, f64::NEG_INFINITY);
    for s in dist.support() {
        let v = func.value(&s);
        if v > best.1 {
            best = (s, v);
        }
    }
    Ok(TightRun {
        k,
        ell,
        dist,
        value: best.1,
        solution: best.0,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::card::build_lp;
    use crate::extreme_point::solve_basic_optimal;
    use crate::oracle::check_submodular;

    #[test]
    fn g_values() {
        assert_eq!(g(0.0).unwrap(), 0.0);
        assert!((g(1.0).unwrap() - E_INV).abs() < 1e-15);
        assert!((g(0.5).unwrap() - 0.5 * 2f64.ln()).abs() < 1e-15);
        assert!((E_INV - (-1f64).exp()).abs() < 1e-16);
        // continuous at the breakpoint
        assert!((g_unchecked(1.0 - E_INV) - E_INV).abs() < 1e-12);
        assert!(g(1.5).is_err() && g(-0.1).is_err() && g(f64::NAN).is_err());
    }

    #[test]
    fn g_monotone_concave() {
        let xs: Vec<f64> = (0..=1000).map(|i| i as f64 / 1000.0).collect();
        for w in xs.windows(3) {
            let (a, b, c) = (g_unchecked(w[0]), g_unchecked(w[1]), g_unchecked(w[2]));
            assert!(b >= a - 1e-15);
            assert!(b - a >= c - b - 1e-12);
        }
    }

    #[test]
    fn objective_values() {
        let f = TightFunction::new(8, 17.0).unwrap();
        assert!((f.value(&f.o()) - 1.0).abs() < 1e-15);
        assert_eq!(f.value(&ElementSet::EMPTY), 0.0);
        for t in 0..=8 {
            let s: ElementSet = (8..8 + t).collect();
            let v = f.value(&s);
            assert!((v - (g_unchecked(t as f64 / 8.0) + 17.0 * t as f64 / 64.0)).abs() < 1e-15);
            assert!(v <= E_INV + 17.0 / 8.0);
            assert_eq!(v, tight_f(&s, 8, 17.0));
        }
    }

    #[test]
    fn closed_form_marginals_match() {
        let k = 8;
        let f = TightFunction::new(k, 17.0).unwrap();
        for mask in 0u64..(1 << (2 * k)) {
            let s = ElementSet::from_mask(mask);
            let x = s.intersection(&f.o()).len() as f64 / k as f64;
            let y = s.intersection(&f.y()).len() as f64 / k as f64;
            let base = f.value(&s);
            for u in (0..2 * k).filter(|&u| !s.contains(u)) {
                let direct = f.value(&s.with(u)) - base;
                let closed = if u < k {
                    marginal_o(y, x, k, 17.0)
                } else {
                    marginal_y(y, x, k, 17.0)
                };
                assert!((direct - closed).abs() < 1e-9, "S={s}, u={u}");
            }
        }
        assert!((marginal_o(0.0, 0.0, k, 17.0) - 1.0 / 8.0).abs() < 1e-15);
        assert!((marginal_y(0.75, 0.0, k, 17.0) - 17.0 / 64.0).abs() < 1e-15);
    }

    #[test]
    fn submodular_small_k() {
        for k in [4, 6, 8] {
            for ell in [17.0, 1.0] {
                let f = ValueOracle::new(TightFunction::new(k, ell).unwrap());
                assert!(check_submodular(&f).unwrap(), "k={k}, ℓ={ell}");
            }
        }
    }

    #[test]
    fn cyclic_distribution() {
        assert_eq!(dist_z(0.0, 5).unwrap(), Distribution::point(ElementSet::EMPTY));
        let d = dist_z(0.25, 4).unwrap();
        assert_eq!(d.len(), 4);
        assert!(d.iter().all(|t| t.state.len() == 1 && (t.p - 0.25).abs() < 1e-15));
        let d = dist_z(0.37, 6).unwrap();
        assert!((d.total_mass() - 1.0).abs() < 1e-12);
        for u in 0..6 {
            assert!(d.prob_containing(u) < 1e-15);
            assert!((d.prob_containing(6 + u) - 0.37).abs() < 1e-12);
        }
        let full = dist_z(1.0, 3).unwrap();
        assert_eq!(full.support(), vec![ElementSet::from_mask(0b111000)]);
    }

    #[test]
    fn run_preconditions() {
        assert!(adversarial_run(16, 17.0).is_err());
        assert!(adversarial_run(40, 10.0).is_err());
    }

    #[test]
    fn adversarial_run_k17() {
        let run = adversarial_run(17, 17.0).unwrap();
        assert_eq!(run.trace.len(), 17);
        assert!(run.value <= E_INV + 1.0);
        assert!(max_deviation(&run.dist, &dist_z(z_at(17, 17), 17).unwrap()) <= DIST_TOL);
        assert!(run.trace.iter().any(|r| r.case == 1) && run.trace.iter().any(|r| r.case == 2));
        assert!(run.trace.iter().all(|r| r.support <= 2 * 17));
    }

    #[test]
    fn installed_point_is_optimal() {
        // the installed point attains the LP optimum, checked at k = 17
        let k = 17;
        let func = TightFunction::new(k, 17.0).unwrap();
        let oracle = ValueOracle::new(func);
        let y: Vec<usize> = func.y().iter().collect();
        for i in [1, 2, 5, 9] {
            let dist = dist_z(z_at(i - 1, k), k).unwrap();
            let cand = select_m(&dist, &oracle, &mut SetValues::new(), k).unwrap();
            let cand = crate::card::CandidateSet {
                elements: y.clone(),
                ..cand
            };
            let lp = build_lp(&dist, &cand, k);
            let (x, _) = installed_solution(&dist, i, k).unwrap();
            let opt = solve_basic_optimal(&lp).unwrap().objective;
            assert!((lp.objective_value(&x) - opt).abs() < 1e-9, "i={i}");
        }
    }
}
