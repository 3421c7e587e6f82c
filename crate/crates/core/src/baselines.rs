//! Seeded randomized algorithms whose coin flips the deterministic versions
//! replace with explicit distributions.
//!
//! Random greedy adds a uniform element of `M_i` each round, where `M_i` may
//! hold fewer than `k` elements; a draw that lands on one of the missing
//! slots skips the round. The common alternative pads the ground set with
//! `k` zero-value dummy elements, which gives the same value distribution.

use crate::error::{invalid, Result};
use crate::oracle::ValueOracle;
use crate::prng::SplitMix64;
use crate::set::ElementSet;

/// Single-trajectory double greedy. Keeps `u` with probability
/// `a⁺ / (a⁺ + b⁺)` (1 when both are 0), using one `next_f64` draw per element.
/// Uses `2n + 2` queries.
pub fn randomized_double_greedy(oracle: &ValueOracle, seed: u64) -> Result<(ElementSet, f64)> {
    let n = oracle.n();
    let mut rng = SplitMix64::new(seed);
    let mut x = ElementSet::EMPTY;
    let mut y = ElementSet::full(n);
    let mut fx = oracle.eval(&x)?;
    let mut fy = oracle.eval(&y)?;
    for u in 0..n {
        let fxu = oracle.eval(&x.with(u))?;
        let fyu = oracle.eval(&y.without(u))?;
        let a = (fxu - fx).max(0.0);
        let b = (fyu - fy).max(0.0);
        let keep = if a + b == 0.0 { 1.0 } else { a / (a + b) };
        if rng.next_f64() < keep {
            x.insert(u);
            fx = fxu;
        } else {
            y.remove(u);
            fy = fyu;
        }
    }
    Ok((x, fx))
}

/// `k` rounds of random greedy against the current set. Each round draws a
/// slot in `0..k`; slots past the end of `M_i` skip the round. Uses at most
/// `1 + kn` queries.
pub fn random_greedy_cardinality(oracle: &ValueOracle, k: usize, seed: u64) -> Result<(ElementSet, f64)> {
    let n = oracle.n();
    if k > n {
        return Err(invalid(format!("cardinality bound {k} exceeds ground set size {n}")));
    }
    let mut rng = SplitMix64::new(seed);
    let mut s = ElementSet::EMPTY;
    let mut fs = oracle.eval(&s)?;
    for _ in 0..k {
        let mut gains = Vec::with_capacity(n);
        for u in (0..n).filter(|&u| !s.contains(u)) {
            let v = oracle.eval(&s.with(u))?;
            if v - fs > 0.0 {
                gains.push((v - fs, u, v));
            }
        }
        gains.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        gains.truncate(k);
        let slot = rng.below(k);
        if let Some(&(_, u, v)) = gains.get(slot) {
            s.insert(u);
            fs = v;
        }
    }
    Ok((s, fs))
}
