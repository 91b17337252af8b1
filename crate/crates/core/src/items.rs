//! Item subsets as bitmasks over a ground set `{1, ..., n}` (bit `i-1`
//! encodes item `i`). Ground sets stay small by design; everything here is
//! exhaustive enumeration.

use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ItemSet(pub u32);

impl ItemSet {
    pub const EMPTY: ItemSet = ItemSet(0);

    pub fn full(n: u32) -> ItemSet {
        debug_assert!(n <= 32);
        if n == 32 {
            ItemSet(u32::MAX)
        } else {
            ItemSet((1u32 << n) - 1)
        }
    }

    pub fn singleton(i: u32) -> ItemSet {
        ItemSet(1 << i)
    }

    pub fn contains(self, i: u32) -> bool {
        self.0 & (1 << i) != 0
    }

    pub fn insert(self, i: u32) -> ItemSet {
        ItemSet(self.0 | (1 << i))
    }

    pub fn remove(self, i: u32) -> ItemSet {
        ItemSet(self.0 & !(1 << i))
    }

    pub fn union(self, other: ItemSet) -> ItemSet {
        ItemSet(self.0 | other.0)
    }

    pub fn intersect(self, other: ItemSet) -> ItemSet {
        ItemSet(self.0 & other.0)
    }

    pub fn minus(self, other: ItemSet) -> ItemSet {
        ItemSet(self.0 & !other.0)
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset_of(self, other: ItemSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn len(self) -> u32 {
        self.0.count_ones()
    }

    pub fn iter(self) -> impl Iterator<Item = u32> {
        (0..32).filter(move |i| self.contains(*i))
    }

    /// All subsets of the ground set `[n]`, in increasing bitmask order.
    pub fn all(n: u32) -> impl Iterator<Item = ItemSet> {
        (0..=ItemSet::full(n).0).map(ItemSet)
    }

    /// All subsets of `self`, in increasing bitmask order (includes empty
    /// set and `self`).
    pub fn subsets(self) -> SubsetIter {
        SubsetIter {
            mask: self.0,
            cur: 0,
            done: false,
        }
    }

    /// Lexicographic order on the sorted element list: compare smallest
    /// elements first, and a proper prefix precedes its extensions.
    /// E.g. {} < {1} < {1,2} < {1,3} < {2}.
    pub fn lex_cmp(self, other: ItemSet) -> std::cmp::Ordering {
        let (mut a, mut b) = (self.0, other.0);
        while a != 0 && b != 0 {
            let (ia, ib) = (a.trailing_zeros(), b.trailing_zeros());
            match ia.cmp(&ib) {
                std::cmp::Ordering::Equal => {
                    a &= a - 1;
                    b &= b - 1;
                }
                ord => return ord,
            }
        }
        a.count_ones().cmp(&b.count_ones())
    }
}

pub struct SubsetIter {
    mask: u32,
    cur: u32,
    done: bool,
}

impl Iterator for SubsetIter {
    type Item = ItemSet;

    fn next(&mut self) -> Option<ItemSet> {
        if self.done {
            return None;
        }
        let out = ItemSet(self.cur);
        if self.cur == self.mask {
            self.done = true;
        } else {
            // next subset of mask in increasing order
            self.cur = (self.cur.wrapping_sub(self.mask)) & self.mask;
        }
        Some(out)
    }
}

impl fmt::Display for ItemSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        let mut first = true;
        for i in self.iter() {
            if !first {
                write!(f, ",")?;
            }
            write!(f, "{}", i + 1)?;
            first = false;
        }
        write!(f, "}}")
    }
}

impl fmt::Debug for ItemSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
