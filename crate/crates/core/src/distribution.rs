//! Explicit finite distributions over algorithm states.
//!
//! A distribution is a multiset of `(p, state)` tuples. Identical states may
//! appear more than once; the probability of a state is the sum over its
//! tuples. [`Distribution::unify`] merges them.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{invalid, Result};
use crate::set::ElementSet;

/// Tuples with probability at or below this are treated as absent.
pub const PROB_FLOOR: f64 = 1e-12;
/// Tolerance on the total mass of a distribution.
pub const MASS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedState<S> {
    pub p: f64,
    pub state: S,
}

/// Renders a state for the tab-separated debug dump.
pub trait HexState {
    fn hex(&self) -> String;
}

impl HexState for ElementSet {
    fn hex(&self) -> String {
        self.to_hex()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Distribution<S> {
    tuples: Vec<WeightedState<S>>,
}

impl<S: Clone + Ord> Distribution<S> {
    /// All mass on one state.
    pub fn point(state: S) -> Self {
        Self {
            tuples: vec![WeightedState { p: 1.0, state }],
        }
    }

    /// Checked constructor: every `p` must exceed [`PROB_FLOOR`] and the
    /// masses must sum to one within [`MASS_TOL`]. Tuples are kept as given.
    pub fn from_tuples(tuples: Vec<(f64, S)>) -> Result<Self> {
        let dist = Self::from_tuples_unchecked(tuples);
        if let Some(t) = dist.tuples.iter().find(|t| !(t.p.is_finite() && t.p > PROB_FLOOR)) {
            return Err(invalid(format!("tuple probability {} is not positive", t.p)));
        }
        let mass = dist.total_mass();
        if (mass - 1.0).abs() > MASS_TOL {
            return Err(invalid(format!("probabilities sum to {mass}, not 1")));
        }
        Ok(dist)
    }

    pub(crate) fn from_tuples_unchecked(tuples: Vec<(f64, S)>) -> Self {
        Self {
            tuples: tuples
                .into_iter()
                .map(|(p, state)| WeightedState { p, state })
                .collect(),
        }
    }

    pub fn tuples(&self) -> &[WeightedState<S>] {
        &self.tuples
    }

    pub fn iter(&self) -> impl Iterator<Item = &WeightedState<S>> {
        self.tuples.iter()
    }

    /// Number of tuples, `|D|`.
    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.tuples.iter().map(|t| t.p).sum()
    }

    /// Distinct states, ascending.
    pub fn support(&self) -> Vec<S> {
        let mut states: Vec<S> = self.tuples.iter().map(|t| t.state.clone()).collect();
        states.sort();
        states.dedup();
        states
    }

    pub fn probability_of(&self, state: &S) -> f64 {
        self.tuples.iter().filter(|t| &t.state == state).map(|t| t.p).sum()
    }

    /// Merge identical states, drop tuples at or below [`PROB_FLOOR`], and
    /// rescale the remainder to total mass one. Output is sorted by state.
    pub fn unify(&self) -> Self {
        let mut merged: BTreeMap<S, f64> = BTreeMap::new();
        for t in &self.tuples {
            *merged.entry(t.state.clone()).or_insert(0.0) += t.p;
        }
        merged.retain(|_, p| *p > PROB_FLOOR);
        let mass: f64 = merged.values().sum();
        let scale = if mass > 0.0 { 1.0 / mass } else { 1.0 };
        Self {
            tuples: merged
                .into_iter()
                .map(|(state, p)| WeightedState { p: p * scale, state })
                .collect(),
        }
    }

    pub fn expectation<F: FnMut(&S) -> f64>(&self, mut phi: F) -> f64 {
        self.tuples.iter().map(|t| t.p * phi(&t.state)).sum()
    }

    /// Fallible variant of [`expectation`](Self::expectation), for when `phi`
    /// queries an oracle.
    pub fn try_expectation<E, F: FnMut(&S) -> std::result::Result<f64, E>>(
        &self,
        mut phi: F,
    ) -> std::result::Result<f64, E> {
        let mut total = 0.0;
        for t in &self.tuples {
            total += t.p * phi(&t.state)?;
        }
        Ok(total)
    }
}

impl<S: Clone + Ord + HexState> Distribution<S> {
    /// One line per tuple, `p<TAB>state-hex`, sorted by state.
    pub fn dump(&self) -> String {
        let mut rows: Vec<&WeightedState<S>> = self.tuples.iter().collect();
        rows.sort_by(|a, b| a.state.cmp(&b.state).then(a.p.total_cmp(&b.p)));
        let mut out = String::new();
        for t in rows {
            writeln!(out, "{}\t{}", t.p, t.state.hex()).unwrap();
        }
        out
    }
}

impl Distribution<ElementSet> {
    /// `Pr_{S~D}[u ∉ S]`
    pub fn prob_not_containing(&self, u: usize) -> f64 {
        self.tuples.iter().filter(|t| !t.state.contains(u)).map(|t| t.p).sum()
    }

    /// `Pr_{S~D}[u ∈ S]`
    pub fn prob_containing(&self, u: usize) -> f64 {
        self.tuples.iter().filter(|t| t.state.contains(u)).map(|t| t.p).sum()
    }

    /// `min_{u < n} Pr[u ∉ S]` (1 for an empty ground set).
    pub fn min_prob_not_containing(&self, n: usize) -> f64 {
        (0..n).map(|u| self.prob_not_containing(u)).fold(1.0, f64::min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(elements: &[usize]) -> ElementSet {
        ElementSet::from_elements(elements.iter().copied())
    }

    #[test]
    fn total_mass_examples() {
        assert_eq!(Distribution::point(ElementSet::EMPTY).total_mass(), 1.0);
        let a = set(&[0]);
        let b = set(&[1]);
        let d = Distribution::from_tuples(vec![(0.5, a), (0.25, b), (0.25, a)]).unwrap();
        assert_eq!(d.total_mass(), 1.0);
        assert_eq!(d.len(), 3);
        assert_eq!(d.support(), vec![a, b]);
        assert_eq!(d.probability_of(&a), 0.75);
    }

    #[test]
    fn from_tuples_validates() {
        assert!(Distribution::from_tuples(vec![(0.5, set(&[0]))]).is_err());
        assert!(Distribution::from_tuples(vec![(1.0, set(&[0])), (0.0, set(&[1]))]).is_err());
        assert!(Distribution::from_tuples(vec![(1.5, set(&[0])), (-0.5, set(&[1]))]).is_err());
    }

    #[test]
    fn unify_examples() {
        let a = set(&[3]);
        let d = Distribution::from_tuples(vec![(0.5, a), (0.5, a)]).unwrap().unify();
        assert_eq!(d.tuples(), &[WeightedState { p: 1.0, state: a }]);
        let single = Distribution::point(a);
        assert_eq!(single.unify(), single);
    }

    #[test]
    fn unify_drops_dust_and_renormalizes() {
        let d = Distribution::from_tuples_unchecked(vec![(0.6, set(&[1])), (1e-13, set(&[2])), (0.4, set(&[0]))]);
        let u = d.unify();
        assert_eq!(u.len(), 2);
        assert_eq!(u.tuples()[0].state, set(&[0]));
        assert!((u.total_mass() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn expectation_examples() {
        let f = |s: &ElementSet| s.len() as f64 * 2.0;
        assert_eq!(Distribution::point(ElementSet::EMPTY).expectation(f), 0.0);
        let d = Distribution::from_tuples(vec![(0.5, set(&[0])), (0.5, set(&[0, 1]))]).unwrap();
        assert_eq!(d.expectation(f), 3.0);
    }

    #[test]
    fn prob_not_containing_examples() {
        assert_eq!(Distribution::point(ElementSet::EMPTY).prob_not_containing(4), 1.0);
        let d = Distribution::from_tuples(vec![(0.5, set(&[2])), (0.5, ElementSet::EMPTY)]).unwrap();
        assert_eq!(d.prob_not_containing(2), 0.5);
        assert_eq!(d.min_prob_not_containing(3), 0.5);
    }

    #[test]
    fn dump_format() {
        let d = Distribution::from_tuples(vec![(0.75, set(&[0, 2])), (0.25, set(&[1]))]).unwrap();
        assert_eq!(d.dump(), "0.25\t2\n0.75\t5\n");
    }

    fn arb_dist() -> impl Strategy<Value = Distribution<ElementSet>> {
        prop::collection::vec((0.01f64..1.0, 0u64..16), 1..8).prop_map(|raw| {
            let total: f64 = raw.iter().map(|r| r.0).sum();
            Distribution::from_tuples_unchecked(
                raw.into_iter()
                    .map(|(p, m)| (p / total, ElementSet::from_mask(m)))
                    .collect(),
            )
        })
    }

    proptest! {
        #[test]
        fn unify_is_idempotent(d in arb_dist()) {
            let once = d.unify();
            let twice = once.unify();
            prop_assert_eq!(once.len(), twice.len());
            for (a, b) in once.tuples().iter().zip(twice.tuples()) {
                prop_assert_eq!(a.state, b.state);
                prop_assert!((a.p - b.p).abs() < 1e-15);
            }
            prop_assert!(once.len() <= d.len());
            prop_assert!((once.total_mass() - 1.0).abs() < MASS_TOL);
        }

        #[test]
        fn expectation_is_linear(d in arb_dist(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
            let phi = |s: &ElementSet| s.len() as f64;
            let psi = |s: &ElementSet| (s.mask() as f64).sqrt();
            let lhs = d.expectation(|s| a * phi(s) + b * psi(s));
            let rhs = a * d.expectation(phi) + b * d.expectation(psi);
            prop_assert!((lhs - rhs).abs() < 1e-9);
        }
    }
}
