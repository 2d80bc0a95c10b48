//! Fixed-size bitset over grid cells.

use alloc::vec;
use alloc::vec::Vec;

const WORD: usize = 64;

/// A set of cell indices in `0..len`, stored one bit per cell.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CellSet {
    words: Vec<u64>,
    len: usize,
}

impl CellSet {
    /// Empty set over `len` cells.
    pub fn new(len: usize) -> Self {
        CellSet {
            words: vec![0; len.div_ceil(WORD)],
            len,
        }
    }

    /// Set containing every cell in `0..len`.
    pub fn full(len: usize) -> Self {
        let mut s = CellSet {
            words: vec![u64::MAX; len.div_ceil(WORD)],
            len,
        };
        s.clear_tail();
        s
    }

    /// Builds a set from indices; indices `>= len` are ignored.
    pub fn from_indices<I: IntoIterator<Item = usize>>(len: usize, indices: I) -> Self {
        let mut s = CellSet::new(len);
        for i in indices {
            if i < len {
                s.insert(i);
            }
        }
        s
    }

    fn clear_tail(&mut self) {
        let rem = self.len % WORD;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    /// Number of cells the set ranges over (not the number of members).
    pub fn universe(&self) -> usize {
        self.len
    }

    pub fn insert(&mut self, i: usize) {
        assert!(i < self.len, "cell {i} out of range {}", self.len);
        self.words[i / WORD] |= 1 << (i % WORD);
    }

    pub fn remove(&mut self, i: usize) {
        assert!(i < self.len, "cell {i} out of range {}", self.len);
        self.words[i / WORD] &= !(1 << (i % WORD));
    }

    pub fn contains(&self, i: usize) -> bool {
        i < self.len && self.words[i / WORD] & (1 << (i % WORD)) != 0
    }

    /// Number of members.
    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// In-place union. Both sets must range over the same universe.
    pub fn union_with(&mut self, other: &CellSet) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= *b;
        }
    }

    /// In-place intersection.
    pub fn intersect_with(&mut self, other: &CellSet) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= *b;
        }
    }

    /// `|self \ other|` without allocating.
    pub fn difference_count(&self, other: &CellSet) -> usize {
        debug_assert_eq!(self.len, other.len);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & !b).count_ones() as usize)
            .sum()
    }

    /// Iterates members in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut bits = w;
            core::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let tz = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(wi * WORD + tz)
            })
        })
    }
}

impl core::fmt::Debug for CellSet {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "CellSet({}/{}) ", self.count(), self.len)?;
        f.debug_set().entries(self.iter()).finish()
    }
}
