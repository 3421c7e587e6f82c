//! Value-oracle access to set functions, concrete submodular families, and
//! exhaustive checks used as test oracles.
//!
//! Every evaluation through a [`ValueOracle`] is counted. There is no
//! memoization at this layer: algorithms cache what they need themselves, so
//! the counter reflects exactly the queries an algorithm chose to make.

use std::cell::Cell;
use std::sync::Arc;

use crate::error::{invalid, Error, Result};
use crate::set::{ElementSet, MAX_ELEMENTS};

/// Absolute tolerance used by the exhaustive checks.
pub const CHECK_TOL: f64 = 1e-9;

/// Largest `n` accepted by [`TableFunction`].
pub const MAX_TABLE_N: usize = 24;
/// Largest `n` accepted by [`check_submodular`] and [`check_nonnegative`].
pub const MAX_CHECK_N: usize = 16;
/// Largest `n` accepted by [`brute_force_opt`].
pub const MAX_BRUTE_FORCE_N: usize = 20;

/// A set function over the ground set `0..ground_size()`.
pub trait SetFunction: Send + Sync {
    fn ground_size(&self) -> usize;

    /// `f(S)`. Callers guarantee `S ⊆ 0..ground_size()`.
    fn value(&self, set: &ElementSet) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroundSet {
    n: usize,
}

impl GroundSet {
    pub fn new(n: usize) -> Result<Self> {
        if n > MAX_ELEMENTS {
            return Err(Error::Capacity {
                what: "ground set size",
                got: n,
                limit: MAX_ELEMENTS,
            });
        }
        Ok(Self { n })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn full(&self) -> ElementSet {
        ElementSet::full(self.n)
    }

    pub fn contains_set(&self, set: &ElementSet) -> bool {
        set.bound() <= self.n
    }
}

/// A set function plus a query counter.
///
/// The function is shared (`Arc`) and immutable; the counter belongs to this
/// handle. Use [`ValueOracle::fresh`] to give each concurrent run its own
/// counter over the same function.
pub struct ValueOracle {
    func: Arc<dyn SetFunction>,
    ground: GroundSet,
    queries: Cell<u64>,
}

impl ValueOracle {
    pub fn new<F: SetFunction + 'static>(func: F) -> Self {
        Self::from_arc(Arc::new(func))
    }

    pub fn from_arc(func: Arc<dyn SetFunction>) -> Self {
        let ground = GroundSet::new(func.ground_size()).expect("set function ground set too large");
        Self {
            func,
            ground,
            queries: Cell::new(0),
        }
    }

    /// Same function, counter reset to zero.
    pub fn fresh(&self) -> Self {
        Self {
            func: Arc::clone(&self.func),
            ground: self.ground,
            queries: Cell::new(0),
        }
    }

    pub fn function(&self) -> &Arc<dyn SetFunction> {
        &self.func
    }

    pub fn ground(&self) -> GroundSet {
        self.ground
    }

    pub fn n(&self) -> usize {
        self.ground.len()
    }

    pub fn query_count(&self) -> u64 {
        self.queries.get()
    }

    pub fn reset_count(&self) {
        self.queries.set(0);
    }

    pub fn eval(&self, set: &ElementSet) -> Result<f64> {
        if !self.ground.contains_set(set) {
            return Err(invalid(format!(
                "set {set} has an element outside the ground set of size {}",
                self.n()
            )));
        }
        self.queries.set(self.queries.get() + 1);
        Ok(self.func.value(set))
    }

    /// `f(u | S) = f(S + u) - f(S)`, always two queries.
    pub fn marginal(&self, u: usize, set: &ElementSet) -> Result<f64> {
        if u >= self.n() {
            return Err(invalid(format!("element {u} outside ground set of size {}", self.n())));
        }
        let with = self.eval(&set.with(u))?;
        let base = self.eval(set)?;
        Ok(with - base)
    }
}

impl std::fmt::Debug for ValueOracle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ValueOracle")
            .field("n", &self.n())
            .field("queries", &self.query_count())
            .finish()
    }
}

/// Explicit table indexed by the bitmask of the set.
#[derive(Debug, Clone)]
pub struct TableFunction {
    n: usize,
    values: Vec<f64>,
}

impl TableFunction {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() || !values.len().is_power_of_two() {
            return Err(invalid(format!("table length {} is not a power of two", values.len())));
        }
        let n = values.len().trailing_zeros() as usize;
        if n > MAX_TABLE_N {
            return Err(Error::Capacity {
                what: "table ground set size",
                got: n,
                limit: MAX_TABLE_N,
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(invalid(format!("table entry {i} is not finite")));
        }
        Ok(Self { n, values })
    }

    /// Tabulate any function with `n <= 24`, without going through a counter.
    pub fn tabulate(func: &dyn SetFunction) -> Result<Self> {
        let n = func.ground_size();
        if n > MAX_TABLE_N {
            return Err(Error::Capacity {
                what: "table ground set size",
                got: n,
                limit: MAX_TABLE_N,
            });
        }
        let values = (0..1u64 << n).map(|m| func.value(&ElementSet::from_mask(m))).collect();
        Self::new(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

impl SetFunction for TableFunction {
    fn ground_size(&self) -> usize {
        self.n
    }

    fn value(&self, set: &ElementSet) -> f64 {
        self.values[set.mask() as usize]
    }
}

/// Undirected weighted cut: total weight of edges with exactly one endpoint in `S`.
#[derive(Debug, Clone)]
pub struct CutFunction {
    n: usize,
    edges: Vec<(usize, usize, f64)>,
}

impl CutFunction {
    pub fn new(n: usize, edges: Vec<(usize, usize, f64)>) -> Result<Self> {
        GroundSet::new(n)?;
        for &(u, v, w) in &edges {
            if u >= n || v >= n {
                return Err(invalid(format!("edge ({u}, {v}) references a vertex outside 0..{n}")));
            }
            if !(w.is_finite() && w >= 0.0) {
                return Err(invalid(format!(
                    "edge ({u}, {v}) has weight {w}; cut weights must be non-negative"
                )));
            }
        }
        Ok(Self { n, edges })
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }
}

impl SetFunction for CutFunction {
    fn ground_size(&self) -> usize {
        self.n
    }

    fn value(&self, set: &ElementSet) -> f64 {
        self.edges
            .iter()
            .filter(|(u, v, _)| set.contains(*u) != set.contains(*v))
            .map(|(_, _, w)| w)
            .sum()
    }
}

/// Weighted coverage. Element `i` of the ground set is `sets[i]`, a list of
/// universe items; `f(S)` is the total weight of items covered by `S`.
#[derive(Debug, Clone)]
pub struct CoverageFunction {
    covers: Vec<ElementSet>,
    weights: Vec<f64>,
}

impl CoverageFunction {
    pub fn new(sets: Vec<Vec<usize>>, weights: Vec<f64>) -> Result<Self> {
        GroundSet::new(sets.len())?;
        if weights.len() > MAX_ELEMENTS {
            return Err(Error::Capacity {
                what: "coverage universe size",
                got: weights.len(),
                limit: MAX_ELEMENTS,
            });
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(invalid(format!("coverage weight {w} must be non-negative")));
        }
        let mut covers = Vec::with_capacity(sets.len());
        for (i, items) in sets.iter().enumerate() {
            if let Some(item) = items.iter().find(|&&item| item >= weights.len()) {
                return Err(invalid(format!(
                    "set {i} references universe item {item} outside 0..{}",
                    weights.len()
                )));
            }
            covers.push(ElementSet::from_elements(items.iter().copied()));
        }
        Ok(Self { covers, weights })
    }
}

impl SetFunction for CoverageFunction {
    fn ground_size(&self) -> usize {
        self.covers.len()
    }

    fn value(&self, set: &ElementSet) -> f64 {
        let covered = set.iter().fold(ElementSet::EMPTY, |acc, i| acc.union(&self.covers[i]));
        covered.iter().map(|item| self.weights[item]).sum()
    }
}

/// `f(S) = Σ_{u∈S} w_u`. Weights may be negative.
#[derive(Debug, Clone)]
pub struct ModularFunction {
    weights: Vec<f64>,
}

impl ModularFunction {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        GroundSet::new(weights.len())?;
        if let Some(w) = weights.iter().find(|w| !w.is_finite()) {
            return Err(invalid(format!("modular weight {w} is not finite")));
        }
        Ok(Self { weights })
    }
}

impl SetFunction for ModularFunction {
    fn ground_size(&self) -> usize {
        self.weights.len()
    }

    fn value(&self, set: &ElementSet) -> f64 {
        set.iter().map(|u| self.weights[u]).sum()
    }
}

pub fn make_table_function(values: Vec<f64>) -> Result<ValueOracle> {
    Ok(ValueOracle::new(TableFunction::new(values)?))
}

pub fn make_cut_function(n: usize, edges: Vec<(usize, usize, f64)>) -> Result<ValueOracle> {
    Ok(ValueOracle::new(CutFunction::new(n, edges)?))
}

pub fn make_coverage_function(sets: Vec<Vec<usize>>, weights: Vec<f64>) -> Result<ValueOracle> {
    Ok(ValueOracle::new(CoverageFunction::new(sets, weights)?))
}

pub fn make_modular(weights: Vec<f64>) -> Result<ValueOracle> {
    Ok(ValueOracle::new(ModularFunction::new(weights)?))
}

fn tabulate_counted(oracle: &ValueOracle, limit: usize) -> Result<Vec<f64>> {
    let n = oracle.n();
    if n > limit {
        return Err(Error::Capacity {
            what: "ground set size for exhaustive check",
            got: n,
            limit,
        });
    }
    (0..1u64 << n).map(|m| oracle.eval(&ElementSet::from_mask(m))).collect()
}

/// Exhaustive diminishing-returns check: `f(A+u) - f(A) >= f(B+u) - f(B)` for
/// all `A ⊆ B`, `u ∉ B`, within [`CHECK_TOL`].
pub fn check_submodular(oracle: &ValueOracle) -> Result<bool> {
    let table = tabulate_counted(oracle, MAX_CHECK_N)?;
    Ok(table_is_submodular(&table, oracle.n()))
}

pub(crate) fn table_is_submodular(table: &[f64], n: usize) -> bool {
    let full = (1usize << n) - 1;
    for b in 0..=full {
        let outside = full & !b;
        let mut rest = outside;
        while rest != 0 {
            let bit = rest & rest.wrapping_neg();
            rest &= rest - 1;
            let gain_b = table[b | bit] - table[b];
            // every submask A of B, including B and ∅
            let mut a = b;
            loop {
                if table[a | bit] - table[a] < gain_b - CHECK_TOL {
                    return false;
                }
                if a == 0 {
                    break;
                }
                a = (a - 1) & b;
            }
        }
    }
    true
}

/// `f(S) >= -1e-9` for every `S`.
pub fn check_nonnegative(oracle: &ValueOracle) -> Result<bool> {
    let table = tabulate_counted(oracle, MAX_CHECK_N)?;
    Ok(table.iter().all(|&v| v >= -CHECK_TOL))
}

/// Maximizer over all subsets (or all subsets of size `<= k`), ties to the
/// smallest bitmask.
pub fn brute_force_opt(oracle: &ValueOracle, cardinality_bound: Option<usize>) -> Result<(ElementSet, f64)> {
    let n = oracle.n();
    if n > MAX_BRUTE_FORCE_N {
        return Err(Error::Capacity {
            what: "ground set size for brute force",
            got: n,
            limit: MAX_BRUTE_FORCE_N,
        });
    }
    let mut best: Option<(ElementSet, f64)> = None;
    for m in 0..1u64 << n {
        if let Some(k) = cardinality_bound {
            if m.count_ones() as usize > k {
                continue;
            }
        }
        let set = ElementSet::from_mask(m);
        let v = oracle.eval(&set)?;
        // strict improvement keeps the smallest mask on ties
        if best.is_none_or(|(_, bv)| v > bv) {
            best = Some((set, v));
        }
    }
    Ok(best.expect("the empty set is always feasible"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> ValueOracle {
        make_cut_function(3, vec![(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap()
    }

    #[test]
    fn eval_modular() {
        let f = make_modular(vec![2.0, -1.0, 3.0]).unwrap();
        assert_eq!(f.eval(&ElementSet::from_elements([0, 2])).unwrap(), 5.0);
        assert_eq!(f.eval(&ElementSet::EMPTY).unwrap(), 0.0);
    }

    #[test]
    fn eval_counts_every_call() {
        let f = make_modular(vec![2.0, -1.0, 3.0]).unwrap();
        let s = ElementSet::from_elements([1]);
        f.eval(&s).unwrap();
        f.eval(&s).unwrap();
        assert_eq!(f.query_count(), 2);
        let g = f.fresh();
        assert_eq!(g.query_count(), 0);
    }

    #[test]
    fn eval_rejects_out_of_range() {
        let f = make_modular(vec![1.0, 1.0]).unwrap();
        let err = f.eval(&ElementSet::from_elements([2])).unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
        assert_eq!(f.query_count(), 0);
    }

    #[test]
    fn table_lookup() {
        let f = make_table_function(vec![0.0, 1.0, 1.0, 3.0]).unwrap();
        assert_eq!(f.n(), 2);
        assert_eq!(f.eval(&ElementSet::from_elements([0, 1])).unwrap(), 3.0);
        let zero = make_table_function(vec![0.0; 8]).unwrap();
        for m in 0..8 {
            assert_eq!(zero.eval(&ElementSet::from_mask(m)).unwrap(), 0.0);
        }
    }

    #[test]
    fn table_rejects_bad_length() {
        assert!(matches!(make_table_function(vec![0.0; 3]), Err(Error::InvalidInput(_))));
        assert!(matches!(make_table_function(vec![]), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn marginals() {
        let f = make_modular(vec![2.0, -1.0, 3.0]).unwrap();
        assert_eq!(f.marginal(1, &ElementSet::from_elements([0])).unwrap(), -1.0);
        assert_eq!(f.marginal(0, &ElementSet::from_elements([0])).unwrap(), 0.0);
        assert_eq!(f.query_count(), 4);
        assert_eq!(triangle().marginal(0, &ElementSet::EMPTY).unwrap(), 2.0);
        assert!(f.marginal(3, &ElementSet::EMPTY).is_err());
    }

    #[test]
    fn families() {
        assert_eq!(triangle().eval(&ElementSet::from_elements([0])).unwrap(), 2.0);
        // items a=0, b=1, c=2
        let cov = make_coverage_function(vec![vec![0, 1], vec![1, 2]], vec![1.0; 3]).unwrap();
        assert_eq!(cov.eval(&ElementSet::from_elements([0, 1])).unwrap(), 3.0);
        assert_eq!(make_modular(vec![4.0]).unwrap().eval(&ElementSet::EMPTY).unwrap(), 0.0);
    }

    #[test]
    fn families_reject_malformed_input() {
        assert!(make_cut_function(2, vec![(0, 2, 1.0)]).is_err());
        assert!(make_cut_function(2, vec![(0, 1, -1.0)]).is_err());
        assert!(make_coverage_function(vec![vec![3]], vec![1.0]).is_err());
        assert!(make_coverage_function(vec![vec![0]], vec![-1.0]).is_err());
        assert!(make_modular(vec![f64::NAN]).is_err());
    }

    #[test]
    fn submodularity_checks() {
        assert!(check_submodular(&make_modular(vec![2.0, -1.0, 3.0]).unwrap()).unwrap());
        assert!(!check_submodular(&make_table_function(vec![0.0, 1.0, 1.0, 3.0]).unwrap()).unwrap());
        assert!(check_submodular(&triangle()).unwrap());
        assert!(check_nonnegative(&triangle()).unwrap());
        assert!(!check_nonnegative(&make_modular(vec![2.0, -1.0, 3.0]).unwrap()).unwrap());
    }

    #[test]
    fn checks_enforce_capacity() {
        let big = make_modular(vec![1.0; MAX_CHECK_N + 1]).unwrap();
        assert!(matches!(check_submodular(&big), Err(Error::Capacity { .. })));
        let huge = make_modular(vec![1.0; MAX_BRUTE_FORCE_N + 1]).unwrap();
        assert!(matches!(brute_force_opt(&huge, None), Err(Error::Capacity { .. })));
    }

    #[test]
    fn brute_force() {
        let f = make_modular(vec![2.0, -1.0, 3.0]).unwrap();
        assert_eq!(
            brute_force_opt(&f, None).unwrap(),
            (ElementSet::from_elements([0, 2]), 5.0)
        );
        assert_eq!(
            brute_force_opt(&f, Some(1)).unwrap(),
            (ElementSet::from_elements([2]), 3.0)
        );
        let (s, v) = brute_force_opt(&triangle(), None).unwrap();
        assert_eq!(v, 2.0);
        // {0} is the smallest mask with cut value 2
        assert_eq!(s, ElementSet::from_elements([0]));
    }

    /// Direct recomputation with an independent formula (edge list scan per
    /// vertex pair, set union via Vec<bool>) for every subset.
    #[test]
    fn families_match_direct_recomputation() {
        use crate::prng::SplitMix64;
        let mut rng = SplitMix64::new(99);
        for _ in 0..20 {
            let n = 1 + rng.below(10);
            let mut weights = vec![vec![0.0; n]; n];
            let mut edges = Vec::new();
            for u in 0..n {
                for v in u + 1..n {
                    if rng.bernoulli(0.5) {
                        let w = rng.uniform(0.0, 2.0);
                        weights[u][v] += w;
                        edges.push((u, v, w));
                    }
                }
            }
            let cut = make_cut_function(n, edges).unwrap();
            let universe = 1 + rng.below(8);
            let sets: Vec<Vec<usize>> = (0..n)
                .map(|_| (0..universe).filter(|_| rng.bernoulli(0.4)).collect())
                .collect();
            let item_w: Vec<f64> = (0..universe).map(|_| rng.uniform(0.0, 1.0)).collect();
            let cov = make_coverage_function(sets.clone(), item_w.clone()).unwrap();
            let mod_w: Vec<f64> = (0..n).map(|_| rng.uniform(-1.0, 1.0)).collect();
            let modular = make_modular(mod_w.clone()).unwrap();
            for m in 0..1u64 << n {
                let inside = |u: usize| m >> u & 1 == 1;
                let mut cut_direct = 0.0;
                for u in 0..n {
                    for v in u + 1..n {
                        if inside(u) != inside(v) {
                            cut_direct += weights[u][v];
                        }
                    }
                }
                let mut covered = vec![false; universe];
                for (i, items) in sets.iter().enumerate() {
                    if inside(i) {
                        for &it in items {
                            covered[it] = true;
                        }
                    }
                }
                let cov_direct: f64 = (0..universe).filter(|&i| covered[i]).map(|i| item_w[i]).sum();
                let mod_direct: f64 = (0..n).filter(|&u| inside(u)).map(|u| mod_w[u]).sum();
                let s = ElementSet::from_mask(m);
                assert!((cut.eval(&s).unwrap() - cut_direct).abs() < 1e-9);
                assert!((cov.eval(&s).unwrap() - cov_direct).abs() < 1e-9);
                assert!((modular.eval(&s).unwrap() - mod_direct).abs() < 1e-9);
            }
        }
    }
}
