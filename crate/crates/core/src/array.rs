//! Avoidance arrays: per-cell sets of forbidden symbols, stored as bitsets.

use std::fmt;

use crate::error::{Error, Result};
use crate::square::{check_order, CellRef, PartialLatinSquare};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct AvoidanceArray {
    n: usize,
    words: usize,
    bits: Vec<u64>,
}

impl AvoidanceArray {
    pub fn empty(n: usize) -> Self {
        check_order(n).expect("unsupported order");
        let words = n.div_ceil(64);
        AvoidanceArray { n, words, bits: vec![0; n * n * words] }
    }

    /// Builds from per-cell symbol lists in row-major order.
    pub fn from_sets(n: usize, sets: &[Vec<usize>]) -> Result<Self> {
        check_order(n)?;
        if sets.len() != n * n {
            return Err(Error::OrderMismatch { expected: n * n, found: sets.len() });
        }
        let mut a = Self::empty(n);
        for (i, set) in sets.iter().enumerate() {
            for &s in set {
                if s >= n {
                    return Err(Error::SymbolOutOfRange { symbol: s, n });
                }
                a.insert(i / n, i % n, s);
            }
        }
        Ok(a)
    }

    pub fn order(&self) -> usize {
        self.n
    }

    #[inline]
    fn base(&self, r: usize, c: usize) -> usize {
        (r * self.n + c) * self.words
    }

    #[inline]
    pub fn contains(&self, r: usize, c: usize, s: usize) -> bool {
        self.bits[self.base(r, c) + s / 64] >> (s % 64) & 1 == 1
    }

    #[inline]
    pub fn contains_at(&self, cell: CellRef, s: usize) -> bool {
        self.contains(cell.row, cell.col, s)
    }

    pub fn insert(&mut self, r: usize, c: usize, s: usize) {
        assert!(s < self.n, "symbol out of range");
        let b = self.base(r, c);
        self.bits[b + s / 64] |= 1 << (s % 64);
    }

    pub fn remove(&mut self, r: usize, c: usize, s: usize) {
        let b = self.base(r, c);
        self.bits[b + s / 64] &= !(1 << (s % 64));
    }

    pub fn clear_cell(&mut self, r: usize, c: usize) {
        let b = self.base(r, c);
        self.bits[b..b + self.words].fill(0);
    }

    /// Raw bitset words of one cell.
    pub fn cell_words(&self, r: usize, c: usize) -> &[u64] {
        let b = self.base(r, c);
        &self.bits[b..b + self.words]
    }

    pub fn cell_len(&self, r: usize, c: usize) -> usize {
        self.cell_words(r, c).iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Symbols of cell `(r, c)` in increasing order.
    pub fn symbols(&self, r: usize, c: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for (wi, &w) in self.cell_words(r, c).iter().enumerate() {
            let mut w = w;
            while w != 0 {
                let b = w.trailing_zeros() as usize;
                out.push(wi * 64 + b);
                w &= w - 1;
            }
        }
        out
    }

    pub fn is_all_empty(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    /// Total number of (cell, symbol) memberships.
    pub fn total_len(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// True iff the cell set contains the entry of `p` at that cell for some cell.
    pub fn clashes_with(&self, p: &PartialLatinSquare) -> Option<CellRef> {
        p.entries().find(|&(cell, s)| self.contains_at(cell, s)).map(|(cell, _)| cell)
    }

    /// Removes `P(i, j)` from `A(i, j)` wherever `P` is filled.
    pub fn remove_entries_of(&mut self, p: &PartialLatinSquare) {
        for (cell, s) in p.entries() {
            self.remove(cell.row, cell.col, s);
        }
    }

    pub fn transpose(&self) -> Self {
        let n = self.n;
        let mut t = Self::empty(n);
        for r in 0..n {
            for c in 0..n {
                let (src, dst) = (self.base(r, c), t.base(c, r));
                t.bits[dst..dst + self.words].copy_from_slice(&self.bits[src..src + self.words]);
            }
        }
        t
    }

    /// Per-cell sizes, per-row and per-column symbol multiplicities: `(m1, m2, m3)` maxima.
    pub fn profile(&self) -> (usize, usize, usize) {
        let n = self.n;
        let mut m1 = 0;
        let mut m2 = 0;
        let mut col_counts = vec![0usize; n * n];
        let mut row_counts = vec![0usize; n];
        for r in 0..n {
            row_counts.fill(0);
            for c in 0..n {
                let syms = self.symbols(r, c);
                m1 = m1.max(syms.len());
                for s in syms {
                    row_counts[s] += 1;
                    col_counts[c * n + s] += 1;
                }
            }
            m2 = m2.max(row_counts.iter().copied().max().unwrap_or(0));
        }
        let m3 = col_counts.iter().copied().max().unwrap_or(0);
        (m1, m2, m3)
    }
}

impl fmt::Debug for AvoidanceArray {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "AvoidanceArray(n={})", self.n)?;
        for r in 0..self.n {
            let row: Vec<String> = (0..self.n)
                .map(|c| {
                    let s = self.symbols(r, c);
                    if s.is_empty() {
                        ".".to_string()
                    } else {
                        s.iter().map(|x| (x + 1).to_string()).collect::<Vec<_>>().join(",")
                    }
                })
                .collect();
            writeln!(f, "  {}", row.join(" "))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bitset_roundtrip_across_words() {
        let mut a = AvoidanceArray::empty(130);
        a.insert(3, 4, 0);
        a.insert(3, 4, 64);
        a.insert(3, 4, 129);
        assert_eq!(a.symbols(3, 4), vec![0, 64, 129]);
        assert_eq!(a.cell_len(3, 4), 3);
        a.remove(3, 4, 64);
        assert!(!a.contains(3, 4, 64));
        assert_eq!(a.transpose().symbols(4, 3), vec![0, 129]);
    }

    #[test]
    fn profile_counts() {
        let mut a = AvoidanceArray::empty(3);
        a.insert(0, 0, 1);
        a.insert(0, 1, 1);
        a.insert(1, 0, 1);
        a.insert(1, 0, 2);
        assert_eq!(a.profile(), (2, 2, 2));
    }
}
