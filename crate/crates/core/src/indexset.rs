//! Subsets of [m] = {0, ..., m-1} as bitmasks, the lattice elements the set
//! functions are evaluated on. Indices are 0-based throughout.

use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 63;

/// Subset of {0, ..., dim-1} stored as a bitmask. Bits at or above `dim` are
/// always zero.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IndexSet {
    mask: u64,
    dim: usize,
}

impl IndexSet {
    pub fn empty(dim: usize) -> Self {
        assert!(dim <= MAX_DIM, "dimension exceeds bitmask capacity");
        Self { mask: 0, dim }
    }

    pub fn full(dim: usize) -> Self {
        assert!(dim <= MAX_DIM, "dimension exceeds bitmask capacity");
        let mask = if dim == 0 { 0 } else { u64::MAX >> (64 - dim) };
        Self { mask, dim }
    }

    pub fn singleton(dim: usize, i: usize) -> Result<Self> {
        Self::from_indices(dim, &[i])
    }

    pub fn from_indices(dim: usize, indices: &[usize]) -> Result<Self> {
        assert!(dim <= MAX_DIM, "dimension exceeds bitmask capacity");
        let mut mask = 0u64;
        for &i in indices {
            if i >= dim {
                return Err(Error::IndexOutOfRange { index: i, dim });
            }
            mask |= 1 << i;
        }
        Ok(Self { mask, dim })
    }

    /// Build from a raw bitmask; bits beyond `dim` are rejected.
    pub fn from_mask(dim: usize, mask: u64) -> Result<Self> {
        assert!(dim <= MAX_DIM, "dimension exceeds bitmask capacity");
        if dim < 64 && mask >> dim != 0 {
            return Err(Error::IndexOutOfRange {
                index: 63 - mask.leading_zeros() as usize,
                dim,
            });
        }
        Ok(Self { mask, dim })
    }

    pub fn mask(&self) -> u64 {
        self.mask
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn card(&self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.mask == 0
    }

    pub fn contains(&self, i: usize) -> bool {
        i < self.dim && self.mask >> i & 1 == 1
    }

    pub fn union(&self, other: &IndexSet) -> IndexSet {
        assert_eq!(self.dim, other.dim, "index sets over different lattices");
        IndexSet {
            mask: self.mask | other.mask,
            dim: self.dim,
        }
    }

    pub fn intersection(&self, other: &IndexSet) -> IndexSet {
        assert_eq!(self.dim, other.dim, "index sets over different lattices");
        IndexSet {
            mask: self.mask & other.mask,
            dim: self.dim,
        }
    }

    pub fn complement(&self) -> IndexSet {
        IndexSet {
            mask: Self::full(self.dim).mask & !self.mask,
            dim: self.dim,
        }
    }

    pub fn insert(&self, i: usize) -> Result<IndexSet> {
        if i >= self.dim {
            return Err(Error::IndexOutOfRange {
                index: i,
                dim: self.dim,
            });
        }
        Ok(IndexSet {
            mask: self.mask | 1 << i,
            dim: self.dim,
        })
    }

    pub fn is_subset_of(&self, other: &IndexSet) -> bool {
        self.mask & !other.mask == 0
    }

    pub fn is_disjoint_from(&self, other: &IndexSet) -> bool {
        self.mask & other.mask == 0
    }

    /// Ascending enumeration of the member indices.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.dim).filter(move |i| self.mask >> i & 1 == 1)
    }

    pub fn indices(&self) -> Vec<usize> {
        self.iter().collect()
    }

    /// All subsets of [dim] in ascending bitmask order.
    pub fn all(dim: usize) -> impl Iterator<Item = IndexSet> {
        assert!(dim <= MAX_DIM, "dimension exceeds bitmask capacity");
        (0u64..(1 << dim)).map(move |mask| IndexSet { mask, dim })
    }

    /// All k-element subsets in ascending bitmask order (Gosper's hack).
    pub fn all_of_card(dim: usize, k: usize) -> impl Iterator<Item = IndexSet> {
        assert!(dim <= MAX_DIM && k <= dim);
        let limit = 1u64 << dim;
        let mut mask = if k == 0 { 0 } else { (1u64 << k) - 1 };
        let mut done = false;
        std::iter::from_fn(move || {
            if done || mask >= limit {
                return None;
            }
            let out = IndexSet { mask, dim };
            if k == 0 || mask == 0 {
                done = true;
            } else {
                let c = mask & mask.wrapping_neg();
                let r = mask + c;
                mask = (((r ^ mask) >> 2) / c) | r;
            }
            Some(out)
        })
    }
}

impl fmt::Debug for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IndexSet{self}")
    }
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (n, i) in self.iter().enumerate() {
            if n > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

#[derive(Serialize, Deserialize)]
struct IndexSetRepr {
    dim: usize,
    indices: Vec<usize>,
}

impl Serialize for IndexSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        IndexSetRepr {
            dim: self.dim,
            indices: self.indices(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for IndexSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = IndexSetRepr::deserialize(deserializer)?;
        IndexSet::from_indices(repr.dim, &repr.indices).map_err(D::Error::custom)
    }
}
