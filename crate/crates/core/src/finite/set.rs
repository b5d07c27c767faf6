use std::fmt;

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};

/// A set of element indices of a group of known order.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ElemSet {
    bits: FixedBitSet,
}

impl ElemSet {
    pub fn empty(order: usize) -> Self {
        ElemSet {
            bits: FixedBitSet::with_capacity(order),
        }
    }

    pub fn full(order: usize) -> Self {
        let mut bits = FixedBitSet::with_capacity(order);
        bits.insert_range(..);
        ElemSet { bits }
    }

    pub fn from_indices(order: usize, indices: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut s = Self::empty(order);
        for x in indices {
            if x >= order {
                return Err(Error::ElementOutOfRange { index: x, order });
            }
            s.bits.insert(x);
        }
        Ok(s)
    }

    /// `{x : pred(x)}`.
    pub fn filter(order: usize, pred: impl Fn(usize) -> bool) -> Self {
        let mut s = Self::empty(order);
        for x in (0..order).filter(|&x| pred(x)) {
            s.bits.insert(x);
        }
        s
    }

    pub fn universe(&self) -> usize {
        self.bits.len()
    }

    pub fn insert(&mut self, x: usize) {
        self.bits.insert(x);
    }

    pub fn contains(&self, x: usize) -> bool {
        self.bits.contains(x)
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_clear()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.ones()
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    pub fn union(&self, other: &ElemSet) -> ElemSet {
        let mut bits = self.bits.clone();
        bits.union_with(&other.bits);
        ElemSet { bits }
    }

    pub fn intersection(&self, other: &ElemSet) -> ElemSet {
        let mut bits = self.bits.clone();
        bits.intersect_with(&other.bits);
        ElemSet { bits }
    }

    pub fn difference(&self, other: &ElemSet) -> ElemSet {
        let mut bits = self.bits.clone();
        bits.difference_with(&other.bits);
        ElemSet { bits }
    }

    pub fn is_subset(&self, other: &ElemSet) -> bool {
        self.bits.is_subset(&other.bits)
    }

    pub fn is_disjoint(&self, other: &ElemSet) -> bool {
        self.bits.is_disjoint(&other.bits)
    }
}

impl fmt::Display for ElemSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, x) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Debug for ElemSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ElemSet{self}")
    }
}
