//! Deterministic maximization subject to `|S| <= k`.
//!
//! The state is a single set `S`, starting from `∅`. In each of `k`
//! iterations the candidate set `M` holds the (at most `k`) elements with the
//! largest positive expected marginal `E[f(u|S)]`, and the new distribution
//! comes from an optimal extreme point of the transportation-style LP
//!
//! ```text
//! max  Σ_S p_S Σ_{u∈M} x(u,S) f(u|S)
//! s.t. Σ_S p_S x(u,S) <= Pr[u ∉ S] / k      for u ∈ M
//!      Σ_{u∈M} x(u,S) + ℓ(S) = 1             for each state S
//!      x, ℓ >= 0
//! ```
//!
//! State `S` moves to `S + u` with probability `x(u,S)` and stays with
//! probability `ℓ(S)`. The LP has `|M| + |D|` rows, so the support grows by
//! at most `k` per iteration and `|D_k| <= k² + 1`. The best set in the final
//! support has value at least `(1 - 1/k)^(k-1) · OPT`.

use std::collections::HashMap;

use crate::distribution::{Distribution, MASS_TOL, PROB_FLOOR};
use crate::error::{invalid, Error, Result};
use crate::extreme_point::{DenseLp, LpSolver, Simplex, LP_TOL};
use crate::oracle::ValueOracle;
use crate::set::ElementSet;
use crate::stats::RunStats;

pub type SetState = ElementSet;

/// Memoized `f` values for a run.
#[derive(Debug, Clone, Default)]
pub struct SetValues(HashMap<ElementSet, f64>);

impl SetValues {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&mut self, set: &ElementSet, oracle: &ValueOracle) -> Result<f64> {
        if let Some(&v) = self.0.get(set) {
            return Ok(v);
        }
        let v = oracle.eval(set)?;
        self.0.insert(*set, v);
        Ok(v)
    }

    pub fn cached(&self, set: &ElementSet) -> Option<f64> {
        self.0.get(set).copied()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSet {
    /// Chosen elements, largest expected marginal first.
    pub elements: Vec<usize>,
    /// `E[f(u|S)]` for every `u` in the ground set.
    pub expected: Vec<f64>,
    /// `f(u|S_j)` per tuple `j` and element `u` (0 when `u ∈ S_j`).
    pub marginals: Vec<Vec<f64>>,
}

impl CandidateSet {
    pub fn as_set(&self) -> ElementSet {
        ElementSet::from_elements(self.elements.iter().copied())
    }

    /// `Σ_{u∈M} E[f(u|S)]`.
    pub fn total(&self) -> f64 {
        self.elements.iter().map(|&u| self.expected[u]).sum()
    }
}

/// Expected marginals of every element and the best (at most) `k` of them.
pub fn select_m(
    dist: &Distribution<SetState>,
    oracle: &ValueOracle,
    values: &mut SetValues,
    k: usize,
) -> Result<CandidateSet> {
    let n = oracle.n();
    let mut expected = vec![0.0; n];
    let mut marginals = Vec::with_capacity(dist.len());
    for t in dist.iter() {
        let base = values.get(&t.state, oracle)?;
        let mut row = vec![0.0; n];
        for (u, r) in row.iter_mut().enumerate() {
            if !t.state.contains(u) {
                *r = values.get(&t.state.with(u), oracle)? - base;
                expected[u] += t.p * *r;
            }
        }
        marginals.push(row);
    }
    let mut elements: Vec<usize> = (0..n).filter(|&u| expected[u] > 0.0).collect();
    elements.sort_by(|&a, &b| expected[b].total_cmp(&expected[a]).then(a.cmp(&b)));
    elements.truncate(k);
    Ok(CandidateSet {
        elements,
        expected,
        marginals,
    })
}

/// Column of `x(M[u_idx], S_j)`.
pub fn x_index(u_idx: usize, j: usize, states: usize) -> usize {
    u_idx * states + j
}

/// Column of `ℓ(S_j)`.
pub fn ell_index(j: usize, states: usize, candidates: usize) -> usize {
    candidates * states + j
}

/// The iteration LP over the tuples of `dist` (one column block per tuple).
pub fn build_lp(dist: &Distribution<SetState>, cand: &CandidateSet, k: usize) -> DenseLp {
    let m = dist.len();
    let c = cand.elements.len();
    let width = c * m + m;
    let mut objective = vec![0.0; width];
    for (ui, &u) in cand.elements.iter().enumerate() {
        for (j, t) in dist.iter().enumerate() {
            objective[x_index(ui, j, m)] = t.p * cand.marginals[j][u];
        }
    }
    let mut lp = DenseLp::new(width).with_objective(objective).expect("width matches");
    for (ui, &u) in cand.elements.iter().enumerate() {
        let mut row = vec![0.0; width];
        for (j, t) in dist.iter().enumerate() {
            row[x_index(ui, j, m)] = t.p;
        }
        lp.add_le(row, dist.prob_not_containing(u) / k as f64)
            .expect("width matches");
    }
    for j in 0..m {
        let mut row = vec![0.0; width];
        for ui in 0..c {
            row[x_index(ui, j, m)] = 1.0;
        }
        row[ell_index(j, m, c)] = 1.0;
        lp.add_eq(row, 1.0).expect("width matches");
    }
    lp
}

/// Largest violation of the [`build_lp`] rows (and signs) at `x`, computed
/// without building the LP.
pub fn lp_violation(dist: &Distribution<SetState>, candidates: &[usize], k: usize, x: &[f64]) -> f64 {
    let m = dist.len();
    let c = candidates.len();
    let mut worst = x.iter().map(|&v| (-v).max(0.0)).fold(0.0, f64::max);
    for (ui, &u) in candidates.iter().enumerate() {
        let used: f64 = dist.iter().enumerate().map(|(j, t)| t.p * x[x_index(ui, j, m)]).sum();
        worst = worst.max(used - dist.prob_not_containing(u) / k as f64);
    }
    for j in 0..m {
        let total: f64 = (0..c).map(|ui| x[x_index(ui, j, m)]).sum::<f64>() + x[ell_index(j, m, c)];
        worst = worst.max((total - 1.0).abs());
    }
    worst
}

/// Objective of the uniform assignment `x(u,S) = 1[u∉S] / k`:
/// `(1/k) Σ_{u∈M} E[1[u∉S] f(u|S)]`.
pub fn fallback_objective(cand: &CandidateSet, k: usize) -> f64 {
    cand.total() / k as f64
}

/// The distribution induced by an LP point in [`build_lp`] layout.
pub fn apply_solution(
    dist: &Distribution<SetState>,
    candidates: &[usize],
    x: &[f64],
    unify: bool,
) -> Distribution<SetState> {
    let m = dist.len();
    let c = candidates.len();
    let mut tuples = Vec::with_capacity(m + c);
    for (j, t) in dist.iter().enumerate() {
        for (ui, &u) in candidates.iter().enumerate() {
            let v = x[x_index(ui, j, m)];
            if v > PROB_FLOOR {
                tuples.push((v * t.p, t.state.with(u)));
            }
        }
        let stay = x[ell_index(j, m, c)];
        if stay > PROB_FLOOR {
            tuples.push((stay * t.p, t.state));
        }
    }
    let next = Distribution::from_tuples_unchecked(tuples);
    if unify {
        next.unify()
    } else {
        next
    }
}

#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub dist: Distribution<SetState>,
    pub candidates: CandidateSet,
    pub lp_objective: f64,
    pub fallback_objective: f64,
}

pub fn step(
    dist: &Distribution<SetState>,
    oracle: &ValueOracle,
    values: &mut SetValues,
    k: usize,
    solver: &dyn LpSolver,
    unify: bool,
) -> Result<StepOutcome> {
    let candidates = select_m(dist, oracle, values, k)?;
    if candidates.elements.is_empty() {
        return Ok(StepOutcome {
            dist: dist.clone(),
            candidates,
            lp_objective: 0.0,
            fallback_objective: 0.0,
        });
    }
    let lp = build_lp(dist, &candidates, k);
    let sol = solver
        .solve(&lp)
        .map_err(|e| Error::Internal(format!("iteration LP failed: {e}")))?;
    let violation = lp.max_violation(&sol.x);
    if violation > LP_TOL {
        return Err(Error::Internal(format!("LP solution violates a row by {violation:e}")));
    }
    let fallback = fallback_objective(&candidates, k);
    let lp_objective = lp.objective_value(&sol.x);
    if lp_objective < fallback - LP_TOL * (1.0 + fallback.abs()) {
        return Err(Error::Internal(format!(
            "LP objective {lp_objective} below the uniform assignment's {fallback}"
        )));
    }
    let next = apply_solution(dist, &candidates.elements, &sol.x, unify);
    if (next.total_mass() - 1.0).abs() > MASS_TOL {
        return Err(Error::Internal(format!("mass {} after LP update", next.total_mass())));
    }
    let bound = dist.len() + candidates.elements.len();
    if next.len() > bound {
        return Err(Error::Internal(format!(
            "support grew from {} to {} (bound {bound})",
            dist.len(),
            next.len()
        )));
    }
    Ok(StepOutcome {
        dist: next,
        candidates,
        lp_objective,
        fallback_objective: fallback,
    })
}

#[derive(Clone, Copy)]
pub struct CardOptions<'a> {
    pub solver: &'a dyn LpSolver,
    pub keep_duplicates: bool,
    pub record_trace: bool,
}

impl Default for CardOptions<'_> {
    fn default() -> Self {
        Self {
            solver: &Simplex,
            keep_duplicates: false,
            record_trace: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CardOutcome {
    pub solution: ElementSet,
    pub value: f64,
    pub stats: RunStats,
    /// `D_0, ..., D_k` when requested.
    pub trace: Vec<Distribution<SetState>>,
    /// LP objective and uniform-assignment objective per iteration.
    pub lp_objectives: Vec<(f64, f64)>,
}

pub fn run(oracle: &ValueOracle, k: usize) -> Result<CardOutcome> {
    run_with(oracle, k, &CardOptions::default())
}

pub fn run_with(oracle: &ValueOracle, k: usize, options: &CardOptions<'_>) -> Result<CardOutcome> {
    let n = oracle.n();
    if k > n {
        return Err(invalid(format!("cardinality bound {k} exceeds ground set size {n}")));
    }
    let start = oracle.query_count();
    let mut stats = RunStats::default();
    let mut values = SetValues::new();
    let f_empty = values.get(&ElementSet::EMPTY, oracle)?;
    stats.setup_queries = oracle.query_count() - start;

    let mut dist = Distribution::point(ElementSet::EMPTY);
    stats.record(1, f_empty);
    let mut trace = Vec::new();
    if options.record_trace {
        trace.push(dist.clone());
    }
    let mut lp_objectives = Vec::with_capacity(k);

    for i in 1..=k {
        let before = oracle.query_count();
        let out = step(&dist, oracle, &mut values, k, options.solver, !options.keep_duplicates)?;
        stats.iteration_queries.push(oracle.query_count() - before);
        lp_objectives.push((out.lp_objective, out.fallback_objective));
        dist = out.dist;
        debug_assert!(dist.iter().all(|t| t.state.len() <= i));
        let expectation = dist.expectation(|s| values.cached(s).expect("every reachable set was evaluated"));
        stats.record(dist.len(), expectation);
        if options.record_trace {
            trace.push(dist.clone());
        }
    }

    let mut best: Option<(ElementSet, f64)> = None;
    for s in dist.support() {
        let v = values.get(&s, oracle)?;
        if best.is_none_or(|(_, bv)| v > bv) {
            best = Some((s, v));
        }
    }
    let (solution, value) = best.expect("distribution is never empty");
    stats.queries = oracle.query_count() - start;
    Ok(CardOutcome {
        solution,
        value,
        stats,
        trace,
        lp_objectives,
    })
}

/// `E[f(T ∪ S)] >= f(T) · min_u Pr[u ∉ S]` up to `1e-9`, with the minimum over
/// the whole ground set.
pub fn check_decrease_lemma(dist: &Distribution<SetState>, t: &ElementSet, oracle: &ValueOracle) -> Result<bool> {
    let lhs = dist.try_expectation(|s| oracle.eval(&t.union(s)))?;
    let f_t = oracle.eval(t)?;
    Ok(lhs >= f_t * dist.min_prob_not_containing(oracle.n()) - 1e-9)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{brute_force_opt, make_cut_function, make_modular, make_table_function};

    #[test]
    fn select_m_modular() {
        let f = make_modular(vec![2.0, -1.0, 3.0]).unwrap();
        let d = Distribution::point(ElementSet::EMPTY);
        let c = select_m(&d, &f, &mut SetValues::new(), 2).unwrap();
        assert_eq!(c.elements, vec![2, 0]);
        assert_eq!((c.expected[2], c.expected[0]), (3.0, 2.0));
    }

    #[test]
    fn select_m_nothing_positive() {
        let f = make_modular(vec![-1.0, 0.0]).unwrap();
        let d = Distribution::point(ElementSet::EMPTY);
        let c = select_m(&d, &f, &mut SetValues::new(), 2).unwrap();
        assert!(c.elements.is_empty());
        let out = step(&d, &f, &mut SetValues::new(), 2, &Simplex, true).unwrap();
        assert_eq!(out.dist, d);
    }

    #[test]
    fn lp_shape_and_fallback() {
        let f = make_modular(vec![2.0, -1.0, 3.0]).unwrap();
        let d = Distribution::point(ElementSet::EMPTY);
        let c = select_m(&d, &f, &mut SetValues::new(), 2).unwrap();
        let lp = build_lp(&d, &c, 2);
        assert_eq!((lp.le_rows().len(), lp.eq_rows().len()), (2, 1));
        // uniform assignment: x = 1/2 each, ℓ = 0
        let x = vec![0.5, 0.5, 0.0];
        assert_eq!(lp.max_violation(&x), 0.0);
        assert_eq!(lp.objective_value(&x), fallback_objective(&c, 2));
        assert_eq!(fallback_objective(&c, 2), 2.5);
    }

    #[test]
    fn k1_picks_best_singleton() {
        let f = make_table_function(vec![0.0, 1.0, 3.0, 3.5, 2.0, 2.5, 4.0, 4.0]).unwrap();
        let out = run(&f, 1).unwrap();
        assert_eq!((out.solution, out.value), (ElementSet::from_mask(0b010), 3.0));
        assert_eq!(out.stats.max_support, 1);
    }

    #[test]
    fn modular_k2() {
        let f = make_modular(vec![5.0, 4.0, 3.0, -1.0]).unwrap();
        let out = run(&f, 2).unwrap();
        assert_eq!((out.solution, out.value), (ElementSet::from_mask(0b0011), 9.0));
        assert_eq!(brute_force_opt(&f, Some(2)).unwrap().1, 9.0);
    }

    #[test]
    fn k_zero() {
        let f = make_modular(vec![5.0, 4.0]).unwrap();
        let out = run(&f, 0).unwrap();
        assert_eq!((out.solution, out.value), (ElementSet::EMPTY, 0.0));
        assert_eq!(out.stats.queries, 1);
        assert!(run(&f, 3).is_err());
    }

    #[test]
    fn cut_ratio_and_support() {
        let f = make_cut_function(
            5,
            vec![
                (0, 1, 1.0),
                (1, 2, 2.0),
                (2, 3, 1.0),
                (3, 4, 1.5),
                (4, 0, 1.0),
                (0, 2, 0.5),
            ],
        )
        .unwrap();
        for k in 1..=4 {
            let out = run(&f.fresh(), k).unwrap();
            let opt = brute_force_opt(&f, Some(k)).unwrap().1;
            let ratio = (1.0 - 1.0 / k as f64).powi(k as i32 - 1);
            assert!(out.value >= ratio * opt - 1e-9, "k={k}: {} vs {opt}", out.value);
            assert!(out.stats.max_support <= k * k + 1);
            for (i, &s) in out.stats.support_sizes.iter().enumerate() {
                assert!(s <= k * i + 1);
            }
        }
    }

    #[test]
    fn decrease_lemma_point_mass() {
        let f = make_cut_function(3, vec![(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let d = Distribution::point(ElementSet::EMPTY);
        assert!(check_decrease_lemma(&d, &ElementSet::from_mask(0b010), &f).unwrap());
        assert!(check_decrease_lemma(&d, &ElementSet::EMPTY, &f).unwrap());
    }

    #[test]
    fn sparse_violation_matches_lp() {
        let f = make_cut_function(4, vec![(0, 1, 1.0), (1, 2, 1.0), (2, 3, 2.0)]).unwrap();
        let d = Distribution::from_tuples(vec![
            (0.5, ElementSet::EMPTY),
            (0.3, ElementSet::from_mask(0b0010)),
            (0.2, ElementSet::from_mask(0b1000)),
        ])
        .unwrap();
        let c = select_m(&d, &f, &mut SetValues::new(), 2).unwrap();
        let lp = build_lp(&d, &c, 2);
        let mut rng = crate::prng::SplitMix64::new(3);
        for _ in 0..50 {
            let x: Vec<f64> = (0..lp.num_vars()).map(|_| rng.uniform(-0.2, 1.0)).collect();
            let sparse = lp_violation(&d, &c.elements, 2, &x);
            assert!((sparse - lp.max_violation(&x)).abs() < 1e-12);
        }
    }

    #[test]
    fn apply_solution_merges_members() {
        // x(u,S) with u ∈ S keeps S
        let d = Distribution::point(ElementSet::from_mask(0b1));
        let next = apply_solution(&d, &[0], &[0.25, 0.75], true);
        assert_eq!(next.len(), 1);
        assert!((next.tuples()[0].p - 1.0).abs() < 1e-15);
    }
}
