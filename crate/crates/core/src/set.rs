//! Fixed-width bitset over a ground set of at most [`MAX_ELEMENTS`] elements.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

const WORDS: usize = 4;

/// Largest ground set an [`ElementSet`] can describe.
pub const MAX_ELEMENTS: usize = WORDS * 64;

/// A subset of `0..n`, stored as a 256-bit mask.
///
/// Ordering compares the masks as unsigned integers, so "smallest bitmask"
/// tie-breaking is just `min`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct ElementSet([u64; WORDS]);

impl ElementSet {
    pub const EMPTY: ElementSet = ElementSet([0; WORDS]);

    pub fn empty() -> Self {
        Self::EMPTY
    }

    /// `{0, 1, ..., n-1}`.
    pub fn full(n: usize) -> Self {
        assert!(n <= MAX_ELEMENTS, "ground set of {n} elements exceeds {MAX_ELEMENTS}");
        let mut words = [0u64; WORDS];
        for (w, word) in words.iter_mut().enumerate() {
            let lo = w * 64;
            if n >= lo + 64 {
                *word = u64::MAX;
            } else if n > lo {
                *word = (1u64 << (n - lo)) - 1;
            }
        }
        ElementSet(words)
    }

    pub fn from_mask(mask: u64) -> Self {
        ElementSet([mask, 0, 0, 0])
    }

    /// The low 64 bits. Only meaningful when the set lives in `0..64`.
    pub fn mask(&self) -> u64 {
        debug_assert!(self.0[1..].iter().all(|&w| w == 0));
        self.0[0]
    }

    pub fn from_elements<I: IntoIterator<Item = usize>>(elements: I) -> Self {
        let mut set = Self::EMPTY;
        for u in elements {
            set.insert(u);
        }
        set
    }

    pub fn contains(&self, u: usize) -> bool {
        u < MAX_ELEMENTS && (self.0[u / 64] >> (u % 64)) & 1 == 1
    }

    pub fn insert(&mut self, u: usize) {
        assert!(u < MAX_ELEMENTS, "element {u} out of range");
        self.0[u / 64] |= 1 << (u % 64);
    }

    pub fn remove(&mut self, u: usize) {
        if u < MAX_ELEMENTS {
            self.0[u / 64] &= !(1 << (u % 64));
        }
    }

    /// `S + u`
    pub fn with(mut self, u: usize) -> Self {
        self.insert(u);
        self
    }

    /// `S - u`
    pub fn without(mut self, u: usize) -> Self {
        self.remove(u);
        self
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut out = *self;
        for (a, b) in out.0.iter_mut().zip(other.0) {
            *a |= b;
        }
        out
    }

    pub fn intersection(&self, other: &Self) -> Self {
        let mut out = *self;
        for (a, b) in out.0.iter_mut().zip(other.0) {
            *a &= b;
        }
        out
    }

    pub fn difference(&self, other: &Self) -> Self {
        let mut out = *self;
        for (a, b) in out.0.iter_mut().zip(other.0) {
            *a &= !b;
        }
        out
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.0.iter().zip(other.0).all(|(a, b)| a & !b == 0)
    }

    pub fn is_empty(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }

    pub fn len(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// One past the largest element, or 0 for the empty set.
    pub fn bound(&self) -> usize {
        for w in (0..WORDS).rev() {
            if self.0[w] != 0 {
                return w * 64 + 64 - self.0[w].leading_zeros() as usize;
            }
        }
        0
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(w, &word)| {
            let mut bits = word;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let tz = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(w * 64 + tz)
            })
        })
    }

    /// Lowercase hex of the full mask without leading zeros (`0` for the empty set).
    pub fn to_hex(&self) -> String {
        let top = (0..WORDS).rev().find(|&w| self.0[w] != 0);
        match top {
            None => "0".to_string(),
            Some(top) => {
                let mut s = format!("{:x}", self.0[top]);
                for w in (0..top).rev() {
                    s.push_str(&format!("{:016x}", self.0[w]));
                }
                s
            }
        }
    }
}

impl Ord for ElementSet {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.iter().rev().cmp(other.0.iter().rev())
    }
}

impl PartialOrd for ElementSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for ElementSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl fmt::Display for ElementSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, u) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{u}")?;
        }
        write!(f, "}}")
    }
}

impl FromIterator<usize> for ElementSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        Self::from_elements(iter)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_and_len() {
        assert_eq!(ElementSet::full(0), ElementSet::EMPTY);
        assert_eq!(ElementSet::full(3).mask(), 0b111);
        assert_eq!(ElementSet::full(64).len(), 64);
        assert_eq!(ElementSet::full(200).len(), 200);
        assert_eq!(ElementSet::full(256).len(), 256);
        assert_eq!(ElementSet::full(130).bound(), 130);
    }

    #[test]
    fn ordering_is_numeric() {
        let a = ElementSet::from_elements([0, 1]);
        let b = ElementSet::from_elements([2]);
        let c = ElementSet::from_elements([70]);
        assert!(a < b);
        assert!(b < c);
        assert!(ElementSet::EMPTY < a);
    }

    #[test]
    fn hex_and_iter() {
        let s = ElementSet::from_elements([0, 4, 65]);
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![0, 4, 65]);
        assert_eq!(s.to_hex(), "20000000000000011");
        assert_eq!(ElementSet::EMPTY.to_hex(), "0");
        assert_eq!(s.without(65).with(1).to_string(), "{0,1,4}");
    }

    #[test]
    fn set_algebra() {
        let a = ElementSet::from_elements([1, 2, 3]);
        let b = ElementSet::from_elements([3, 4]);
        assert_eq!(a.union(&b), ElementSet::from_elements([1, 2, 3, 4]));
        assert_eq!(a.intersection(&b), ElementSet::from_elements([3]));
        assert_eq!(a.difference(&b), ElementSet::from_elements([1, 2]));
        assert!(ElementSet::from_elements([2]).is_subset(&a));
        assert!(!b.is_subset(&a));
    }
}
