use std::fmt;

use itertools::Itertools;

use crate::error::{Error, Result};

/// Strictly increasing set of 0-based indices, stored as a bitmask.
///
/// Displayed 1-based, e.g. `{1,3}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct IndexSet(u32);

impl IndexSet {
    pub const EMPTY: IndexSet = IndexSet(0);

    /// Builds from a strictly increasing list.
    pub fn from_sorted(indices: &[usize]) -> Result<Self> {
        let mut bits = 0u32;
        let mut prev: Option<usize> = None;
        for &i in indices {
            if i >= 32 {
                return Err(Error::IndexOutOfRange { index: i, total: 32 });
            }
            if prev.is_some_and(|p| p >= i) {
                return Err(Error::Parse(format!("index list {indices:?} is not strictly increasing")));
            }
            prev = Some(i);
            bits |= 1 << i;
        }
        Ok(IndexSet(bits))
    }

    /// Builds from distinct indices in any order.
    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> Self {
        IndexSet(indices.into_iter().fold(0, |acc, i| acc | (1 << i)))
    }

    pub fn singleton(i: usize) -> Self {
        IndexSet(1 << i)
    }

    /// `{0, .., n-1}`.
    pub fn full(n: usize) -> Self {
        if n >= 32 {
            IndexSet(u32::MAX)
        } else {
            IndexSet((1u32 << n) - 1)
        }
    }

    pub fn bits(&self) -> u32 {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn contains(&self, i: usize) -> bool {
        i < 32 && self.0 & (1 << i) != 0
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        let bits = self.0;
        (0..32).filter(move |i| bits & (1 << i) != 0)
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    pub fn max_index(&self) -> Option<usize> {
        if self.0 == 0 {
            None
        } else {
            Some(31 - self.0.leading_zeros() as usize)
        }
    }

    pub fn union(&self, other: &IndexSet) -> IndexSet {
        IndexSet(self.0 | other.0)
    }

    pub fn intersection(&self, other: &IndexSet) -> IndexSet {
        IndexSet(self.0 & other.0)
    }

    pub fn difference(&self, other: &IndexSet) -> IndexSet {
        IndexSet(self.0 & !other.0)
    }

    pub fn is_subset(&self, other: &IndexSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_disjoint(&self, other: &IndexSet) -> bool {
        self.0 & other.0 == 0
    }

    pub fn insert(&self, i: usize) -> IndexSet {
        IndexSet(self.0 | (1 << i))
    }

    pub fn remove(&self, i: usize) -> IndexSet {
        IndexSet(self.0 & !(1 << i))
    }

    /// Number of members strictly smaller than `i`.
    pub fn count_below(&self, i: usize) -> usize {
        (self.0 & ((1u32 << i) - 1)).count_ones() as usize
    }

    /// Number of members strictly larger than `i`.
    pub fn count_above(&self, i: usize) -> usize {
        if i >= 31 {
            0
        } else {
            (self.0 >> (i + 1)).count_ones() as usize
        }
    }

    /// Sign of sorting the concatenation `self ++ other`, or `None` when the
    /// sets overlap (the wedge product vanishes).
    pub fn merge_sign(&self, other: &IndexSet) -> Option<i32> {
        if !self.is_disjoint(other) {
            return None;
        }
        let inversions: usize = self.iter().map(|i| other.count_below(i)).sum();
        Some(if inversions.is_multiple_of(2) { 1 } else { -1 })
    }

    /// All `k`-subsets of `{0, .., n-1}` in lexicographic order.
    pub fn subsets(n: usize, k: usize) -> Vec<IndexSet> {
        (0..n).combinations(k).map(IndexSet::from_indices).collect()
    }

    /// All subsets of `self`, smallest first.
    pub fn sub_sets(&self) -> Vec<IndexSet> {
        let members = self.to_vec();
        (0..=members.len())
            .flat_map(|k| {
                members.iter().copied().combinations(k).map(IndexSet::from_indices).collect::<Vec<_>>()
            })
            .collect()
    }
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.iter().map(|i| (i + 1).to_string()).join(","))
    }
}
