//! Deterministic unconstrained submodular maximization.
//!
//! The state is a pair `(X, Y)` with `X ⊆ Y`, starting from `(∅, N)`. At
//! element `u_i` every state in the distribution either adds `u_i` to `X`
//! (with probability `z`) or removes it from `Y` (with probability
//! `w = 1 - z`). The split is an extreme point of
//!
//! ```text
//! E[z a + w b] >= 2 E[z b]
//! E[z a + w b] >= 2 E[w a]
//! z + w = 1,  z, w >= 0            (per state)
//! ```
//!
//! where `a = f(X + u_i) - f(X)` and `b = f(Y - u_i) - f(Y)`. After all `n`
//! elements `X = Y` in every state and the best state is a 1/2-approximation.
//!
//! By default the system is solved as a signed fractional knapsack (first
//! constraint turned into the objective), which splits at most one state per
//! iteration. [`SolverMode::Generic`] solves it with the dense simplex
//! instead, splitting at most two.

use std::collections::HashMap;

use crate::distribution::{Distribution, HexState, PROB_FLOOR};
use crate::error::{invalid, Error, Result};
use crate::extreme_point::{solve_basic_optimal, solve_signed_knapsack, DenseLp, SignedKnapsackItem};
use crate::oracle::ValueOracle;
use crate::set::ElementSet;
use crate::stats::RunStats;

/// Slack allowed on the two split constraints.
pub const CONSTRAINT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PairState {
    pub x: ElementSet,
    pub y: ElementSet,
}

impl PairState {
    pub fn initial(n: usize) -> Self {
        Self {
            x: ElementSet::EMPTY,
            y: ElementSet::full(n),
        }
    }
}

impl HexState for PairState {
    fn hex(&self) -> String {
        format!("{}:{}", self.x.to_hex(), self.y.to_hex())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolverMode {
    /// Signed fractional knapsack, at most `|D_{i-1}| + 1` tuples.
    #[default]
    Knapsack,
    /// Dense simplex on the full system, at most `|D_{i-1}| + 2` tuples.
    Generic,
}

impl std::str::FromStr for SolverMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "knapsack" => Ok(SolverMode::Knapsack),
            "generic" => Ok(SolverMode::Generic),
            other => Err(invalid(format!("unknown solver mode `{other}`"))),
        }
    }
}

/// `a` and `b` per tuple of the distribution they were computed for.
#[derive(Debug, Clone, PartialEq)]
pub struct StepGains {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

/// Cached `(f(X), f(Y))` per state, carried across iterations so each state
/// costs two fresh queries.
#[derive(Debug, Clone, Default)]
pub struct PairValues(HashMap<PairState, (f64, f64)>);

impl PairValues {
    pub fn new() -> Self {
        Self::default()
    }

    /// Query `f(X)` and `f(Y)` for a state not seen before.
    pub fn seed(&mut self, state: PairState, oracle: &ValueOracle) -> Result<()> {
        if let std::collections::hash_map::Entry::Vacant(e) = self.0.entry(state) {
            let fx = oracle.eval(&state.x)?;
            let fy = oracle.eval(&state.y)?;
            e.insert((fx, fy));
        }
        Ok(())
    }

    pub fn get(&self, state: &PairState) -> Option<(f64, f64)> {
        self.0.get(state).copied()
    }

    fn retain_support(&mut self, dist: &Distribution<PairState>) {
        let live: std::collections::HashSet<PairState> = dist.iter().map(|t| t.state).collect();
        self.0.retain(|s, _| live.contains(s));
    }
}

/// Gains for element `u` in every tuple. Values of the two successor states
/// are added to `values`; states repeated in the multiset are queried once.
pub fn compute_gains(
    dist: &Distribution<PairState>,
    u: usize,
    oracle: &ValueOracle,
    values: &mut PairValues,
) -> Result<StepGains> {
    let mut per_state: HashMap<PairState, (f64, f64)> = HashMap::new();
    let mut gains = StepGains {
        a: Vec::with_capacity(dist.len()),
        b: Vec::with_capacity(dist.len()),
    };
    for t in dist.iter() {
        let st = t.state;
        let (a, b) = match per_state.get(&st) {
            Some(&ab) => ab,
            None => {
                let (fx, fy) = values
                    .get(&st)
                    .ok_or_else(|| Error::Internal(format!("no cached values for state {}", st.hex())))?;
                let fxu = oracle.eval(&st.x.with(u))?;
                let fyu = oracle.eval(&st.y.without(u))?;
                values.0.insert(
                    PairState {
                        x: st.x.with(u),
                        y: st.y,
                    },
                    (fxu, fy),
                );
                values.0.insert(
                    PairState {
                        x: st.x,
                        y: st.y.without(u),
                    },
                    (fx, fyu),
                );
                per_state.insert(st, (fxu - fx, fyu - fy));
                (fxu - fx, fyu - fy)
            }
        };
        gains.a.push(a);
        gains.b.push(b);
    }
    Ok(gains)
}

/// Knapsack form of the split system: item `j` has value `p_j (a_j - 3 b_j)`
/// and size `p_j (b_j - 3 a_j)`, the budget is `Σ p_j (b_j - 2 a_j)`.
pub fn reduce_to_knapsack(gains: &StepGains, dist: &Distribution<PairState>) -> (Vec<SignedKnapsackItem>, f64) {
    let mut budget = 0.0;
    let items = dist
        .iter()
        .zip(gains.a.iter().zip(&gains.b))
        .enumerate()
        .map(|(j, (t, (&a, &b)))| {
            budget += t.p * (b - 2.0 * a);
            SignedKnapsackItem::new(j, t.p * (a - 3.0 * b), t.p * (b - 3.0 * a))
        })
        .collect();
    (items, budget)
}

/// The split system as a [`DenseLp`] over `z_0..z_m, w_0..w_m`, maximizing
/// the expected gain `E[z a + w b]`.
pub fn split_lp(gains: &StepGains, dist: &Distribution<PairState>) -> DenseLp {
    let m = dist.len();
    let p: Vec<f64> = dist.iter().map(|t| t.p).collect();
    let (a, b) = (&gains.a, &gains.b);
    let mut objective = vec![0.0; 2 * m];
    let mut first = vec![0.0; 2 * m];
    let mut second = vec![0.0; 2 * m];
    for j in 0..m {
        objective[j] = p[j] * a[j];
        objective[m + j] = p[j] * b[j];
        // E[z a + w b] - 2 E[z b] >= 0
        first[j] = p[j] * (2.0 * b[j] - a[j]);
        first[m + j] = -p[j] * b[j];
        // E[z a + w b] - 2 E[w a] >= 0
        second[j] = -p[j] * a[j];
        second[m + j] = p[j] * (2.0 * a[j] - b[j]);
    }
    let mut lp = DenseLp::new(2 * m).with_objective(objective).expect("width matches");
    lp.add_le(first, 0.0).expect("width matches");
    lp.add_le(second, 0.0).expect("width matches");
    for j in 0..m {
        let mut row = vec![0.0; 2 * m];
        row[j] = 1.0;
        row[m + j] = 1.0;
        lp.add_eq(row, 1.0).expect("width matches");
    }
    lp
}

/// `(E[za+wb] - 2E[zb], E[za+wb] - 2E[wa])`; both are `>= 0` for a valid split.
pub fn constraint_slacks(gains: &StepGains, dist: &Distribution<PairState>, z: &[f64], w: &[f64]) -> (f64, f64) {
    let mut gain = 0.0;
    let mut zb = 0.0;
    let mut wa = 0.0;
    for (j, t) in dist.iter().enumerate() {
        let (a, b) = (gains.a[j], gains.b[j]);
        gain += t.p * (z[j] * a + w[j] * b);
        zb += t.p * z[j] * b;
        wa += t.p * w[j] * a;
    }
    (gain - 2.0 * zb, gain - 2.0 * wa)
}

/// Per-tuple `(z, w)` solving the split system.
pub fn solve_split(
    gains: &StepGains,
    dist: &Distribution<PairState>,
    mode: SolverMode,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let m = dist.len();
    let (z, w) = match mode {
        SolverMode::Knapsack => {
            let (items, budget) = reduce_to_knapsack(gains, dist);
            let sol = solve_signed_knapsack(&items, budget)
                .map_err(|e| Error::Internal(format!("split system has no solution ({e}); is f submodular?")))?;
            let w = sol.z.iter().map(|z| 1.0 - z).collect();
            (sol.z, w)
        }
        SolverMode::Generic => {
            let sol = solve_basic_optimal(&split_lp(gains, dist))
                .map_err(|e| Error::Internal(format!("split system has no solution ({e}); is f submodular?")))?;
            (sol.x[..m].to_vec(), sol.x[m..].to_vec())
        }
    };
    let (c1, c2) = constraint_slacks(gains, dist, &z, &w);
    if c1 < -CONSTRAINT_TOL || c2 < -CONSTRAINT_TOL {
        return Err(Error::Internal(format!(
            "split violates its constraints (slacks {c1:e}, {c2:e}); is f submodular?"
        )));
    }
    Ok((z, w))
}

/// Result of one iteration.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub dist: Distribution<PairState>,
    pub gains: StepGains,
    pub z: Vec<f64>,
    pub w: Vec<f64>,
}

/// Process element `u`: gains, split, new distribution.
pub fn step(
    dist: &Distribution<PairState>,
    u: usize,
    oracle: &ValueOracle,
    values: &mut PairValues,
    mode: SolverMode,
    unify: bool,
) -> Result<StepOutcome> {
    let gains = compute_gains(dist, u, oracle, values)?;
    let (z, w) = solve_split(&gains, dist, mode)?;
    let mut tuples = Vec::with_capacity(dist.len() + 2);
    for (j, t) in dist.iter().enumerate() {
        if z[j] > PROB_FLOOR {
            tuples.push((
                z[j] * t.p,
                PairState {
                    x: t.state.x.with(u),
                    y: t.state.y,
                },
            ));
        }
        if w[j] > PROB_FLOOR {
            tuples.push((
                w[j] * t.p,
                PairState {
                    x: t.state.x,
                    y: t.state.y.without(u),
                },
            ));
        }
    }
    let next = Distribution::from_tuples_unchecked(tuples);
    let next = if unify { next.unify() } else { next };
    let bound = dist.len() + if mode == SolverMode::Knapsack { 1 } else { 2 };
    if next.len() > bound {
        return Err(Error::Internal(format!(
            "support grew from {} to {} (bound {bound})",
            dist.len(),
            next.len()
        )));
    }
    Ok(StepOutcome {
        dist: next,
        gains,
        z,
        w,
    })
}

#[derive(Debug, Clone, Default)]
pub struct UsmOptions {
    /// Processing order, a permutation of `0..n`; index order when `None`.
    pub order: Option<Vec<usize>>,
    pub solver: SolverMode,
    /// Keep duplicate-state tuples separate instead of merging them.
    pub keep_duplicates: bool,
    /// Keep every intermediate distribution in [`UsmOutcome::trace`].
    pub record_trace: bool,
}

#[derive(Debug, Clone)]
pub struct UsmOutcome {
    pub solution: ElementSet,
    pub value: f64,
    pub stats: RunStats,
    /// `D_0, ..., D_n` when requested.
    pub trace: Vec<Distribution<PairState>>,
    /// The processing order actually used.
    pub order: Vec<usize>,
}

pub(crate) fn validate_order(order: Option<&[usize]>, n: usize) -> Result<Vec<usize>> {
    match order {
        None => Ok((0..n).collect()),
        Some(order) => {
            let mut seen = vec![false; n];
            for &u in order {
                if u >= n || seen[u] {
                    return Err(invalid(format!("order {order:?} is not a permutation of 0..{n}")));
                }
                seen[u] = true;
            }
            if order.len() != n {
                return Err(invalid(format!("order {order:?} is not a permutation of 0..{n}")));
            }
            Ok(order.to_vec())
        }
    }
}

/// Observation-style state invariant after processing `processed` (a prefix
/// of the order): `X` avoids and `Y` contains every unprocessed element, and
/// `X`, `Y` agree on the processed ones.
pub fn pair_invariant_holds(state: &PairState, processed: &[usize], unprocessed: &[usize]) -> bool {
    state.x.is_subset(&state.y)
        && unprocessed.iter().all(|&u| !state.x.contains(u) && state.y.contains(u))
        && processed.iter().all(|&u| state.x.contains(u) == state.y.contains(u))
}

pub fn run(oracle: &ValueOracle, options: &UsmOptions) -> Result<UsmOutcome> {
    let n = oracle.n();
    let order = validate_order(options.order.as_deref(), n)?;
    let start = oracle.query_count();
    let mut stats = RunStats::default();

    let init = PairState::initial(n);
    let mut values = PairValues::new();
    values.seed(init, oracle)?;
    stats.setup_queries = oracle.query_count() - start;

    let mut dist = Distribution::point(init);
    let potential = |d: &Distribution<PairState>, v: &PairValues| {
        d.expectation(|s| {
            let (fx, fy) = v.get(s).expect("values cached for every live state");
            fx + fy
        })
    };
    stats.record(dist.len(), potential(&dist, &values));
    let mut trace = Vec::new();
    if options.record_trace {
        trace.push(dist.clone());
    }

    for (i, &u) in order.iter().enumerate() {
        let before = oracle.query_count();
        let out = step(&dist, u, oracle, &mut values, options.solver, !options.keep_duplicates)?;
        stats.iteration_queries.push(oracle.query_count() - before);
        dist = out.dist;
        values.retain_support(&dist);
        if (dist.total_mass() - 1.0).abs() > crate::distribution::MASS_TOL {
            return Err(Error::Internal(format!(
                "mass {} after iteration {}",
                dist.total_mass(),
                i + 1
            )));
        }
        debug_assert!(dist
            .iter()
            .all(|t| pair_invariant_holds(&t.state, &order[..=i], &order[i + 1..])));
        stats.record(dist.len(), potential(&dist, &values));
        if options.record_trace {
            trace.push(dist.clone());
        }
    }

    let mut best: Option<(ElementSet, f64)> = None;
    for state in dist.support() {
        if state.x != state.y {
            return Err(Error::Internal(format!("final state {} has X != Y", state.hex())));
        }
        let (fx, _) = values.get(&state).expect("values cached for every live state");
        if best.is_none_or(|(_, bv)| fx > bv) {
            best = Some((state.x, fx));
        }
    }
    let (solution, value) = best.expect("distribution is never empty");
    stats.queries = oracle.query_count() - start;
    Ok(UsmOutcome {
        solution,
        value,
        stats,
        trace,
        order,
    })
}
