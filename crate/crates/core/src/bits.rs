//! Small fixed-width bitsets over dense index spaces (domain symbols,
//! thread states). Backed by a single u64 word; constructors panic if an
//! index does not fit, callers guard sizes up front.

/// Set of small indices (< 64), used for symbol sets and contributor-state sets.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct SmallSet(pub u64);

pub const SMALL_SET_CAP: usize = 64;

impl SmallSet {
    pub const EMPTY: SmallSet = SmallSet(0);

    pub fn singleton(i: usize) -> SmallSet {
        assert!(i < SMALL_SET_CAP, "index {i} out of bitset range");
        SmallSet(1 << i)
    }

    pub fn contains(self, i: usize) -> bool {
        i < SMALL_SET_CAP && self.0 & (1 << i) != 0
    }

    #[must_use]
    pub fn with(self, i: usize) -> SmallSet {
        assert!(i < SMALL_SET_CAP, "index {i} out of bitset range");
        SmallSet(self.0 | (1 << i))
    }

    #[must_use]
    pub fn without(self, i: usize) -> SmallSet {
        SmallSet(self.0 & !(1 << i))
    }

    #[must_use]
    pub fn union(self, other: SmallSet) -> SmallSet {
        SmallSet(self.0 | other.0)
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_subset(self, other: SmallSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut rest = self.0;
        std::iter::from_fn(move || {
            if rest == 0 {
                None
            } else {
                let i = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(i)
            }
        })
    }
}

impl FromIterator<usize> for SmallSet {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> SmallSet {
        let mut s = SmallSet::EMPTY;
        for i in iter {
            s = s.with(i);
        }
        s
    }
}
