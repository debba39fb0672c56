//! Vertex subsets as bitmasks over 0-based indices.

use std::fmt;
use std::ops::{BitAnd, BitOr, Not, Sub};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Largest ground set a [`VertexSet`] can address.
pub const MAX_VERTICES: usize = 64;

/// A subset of `{0, …, 63}`; canonical order is ascending bitmask value.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct VertexSet(pub u64);

impl VertexSet {
    pub const EMPTY: VertexSet = VertexSet(0);

    pub fn full(n: usize) -> Self {
        assert!(n <= MAX_VERTICES, "ground set of {n} vertices exceeds {MAX_VERTICES}");
        if n == MAX_VERTICES {
            VertexSet(u64::MAX)
        } else {
            VertexSet((1u64 << n) - 1)
        }
    }

    pub fn singleton(v: usize) -> Self {
        VertexSet(1u64 << v)
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(it: I) -> Self {
        VertexSet(it.into_iter().fold(0u64, |m, v| m | (1u64 << v)))
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains(self, v: usize) -> bool {
        v < MAX_VERTICES && self.0 >> v & 1 == 1
    }

    pub fn insert(&mut self, v: usize) {
        self.0 |= 1u64 << v;
    }

    pub fn is_subset(self, other: VertexSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_disjoint(self, other: VertexSet) -> bool {
        self.0 & other.0 == 0
    }

    /// One past the largest member, 0 for the empty set.
    pub fn span(self) -> usize {
        MAX_VERTICES - self.0.leading_zeros() as usize
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut rest = self.0;
        std::iter::from_fn(move || {
            if rest == 0 {
                None
            } else {
                let v = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(v)
            }
        })
    }

    pub fn to_vec(self) -> Vec<usize> {
        self.iter().collect()
    }

    /// All subsets of `self`, in ascending bitmask order, including `∅` and `self`.
    pub fn subsets(self) -> impl Iterator<Item = VertexSet> {
        let mask = self.0;
        let mut next = Some(0u64);
        std::iter::from_fn(move || {
            let cur = next?;
            next = if cur == mask { None } else { Some((cur.wrapping_sub(mask)) & mask) };
            Some(VertexSet(cur))
        })
    }

    /// Subsets of `self` with fewer than `bound` members.
    pub fn small_subsets(self, bound: usize) -> impl Iterator<Item = VertexSet> {
        self.subsets().filter(move |s| s.len() < bound)
    }

    /// Maps local indices through `embed` (local `i` becomes `embed[i]`).
    pub fn lift(self, embed: &[usize]) -> VertexSet {
        VertexSet::from_indices(self.iter().map(|i| embed[i]))
    }

    /// Inverse of [`VertexSet::lift`] for members of `embed`.
    pub fn restrict_to(self, embed: &[usize]) -> VertexSet {
        VertexSet::from_indices(embed.iter().enumerate().filter(|(_, &v)| self.contains(v)).map(|(i, _)| i))
    }
}

impl BitOr for VertexSet {
    type Output = VertexSet;
    fn bitor(self, rhs: VertexSet) -> VertexSet {
        VertexSet(self.0 | rhs.0)
    }
}

impl BitAnd for VertexSet {
    type Output = VertexSet;
    fn bitand(self, rhs: VertexSet) -> VertexSet {
        VertexSet(self.0 & rhs.0)
    }
}

impl Sub for VertexSet {
    type Output = VertexSet;
    fn sub(self, rhs: VertexSet) -> VertexSet {
        VertexSet(self.0 & !rhs.0)
    }
}

impl Not for VertexSet {
    type Output = VertexSet;
    fn not(self) -> VertexSet {
        VertexSet(!self.0)
    }
}

impl fmt::Debug for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl fmt::Display for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Serialized as a sorted index list.
impl Serialize for VertexSet {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for VertexSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = Vec::<usize>::deserialize(d)?;
        if let Some(&bad) = v.iter().find(|&&i| i >= MAX_VERTICES) {
            return Err(serde::de::Error::custom(format!("vertex index {bad} too large")));
        }
        Ok(VertexSet::from_indices(v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subsets_enumerates_all_in_order() {
        let s = VertexSet::from_indices([0, 2, 3]);
        let subs: Vec<u64> = s.subsets().map(|x| x.0).collect();
        assert_eq!(subs, vec![0, 1, 4, 5, 8, 9, 12, 13]);
        assert_eq!(VertexSet::EMPTY.subsets().count(), 1);
    }

    #[test]
    fn lift_and_restrict() {
        let embed = [1, 4, 6];
        let local = VertexSet::from_indices([0, 2]);
        let top = local.lift(&embed);
        assert_eq!(top.to_vec(), vec![1, 6]);
        assert_eq!(top.restrict_to(&embed), local);
    }

    #[test]
    fn full_and_span() {
        assert_eq!(VertexSet::full(3).0, 7);
        assert_eq!(VertexSet::full(64).0, u64::MAX);
        assert_eq!(VertexSet::from_indices([5]).span(), 6);
        assert_eq!(VertexSet::EMPTY.span(), 0);
    }
}
