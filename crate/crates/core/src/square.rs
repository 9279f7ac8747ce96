//! Square grids: partial Latin squares and Latin squares.

use std::fmt;

use crate::error::{Error, Result};
use crate::trade::Trade;

/// Largest supported order. Cells are stored as `u16` with one sentinel value.
pub const MAX_ORDER: usize = u16::MAX as usize - 1;

const EMPTY: u16 = u16::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellRef {
    pub row: usize,
    pub col: usize,
}

impl CellRef {
    pub const fn new(row: usize, col: usize) -> Self {
        CellRef { row, col }
    }

    pub const fn transposed(self) -> Self {
        CellRef { row: self.col, col: self.row }
    }

    #[inline]
    pub(crate) fn index(self, n: usize) -> usize {
        self.row * n + self.col
    }
}

impl fmt::Display for CellRef {
    /// Displays with 1-based coordinates.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.row + 1, self.col + 1)
    }
}

pub fn check_order(n: usize) -> Result<()> {
    if n == 0 || n > MAX_ORDER {
        return Err(Error::UnsupportedOrder(n));
    }
    Ok(())
}

/// An n×n grid whose cells are empty or hold one symbol.
///
/// Mutation through [`set`](Self::set) does not enforce the row/column
/// uniqueness invariant; use [`crate::verify::validate_pls`] to check it.
/// The checked constructors reject grids that break it.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PartialLatinSquare {
    n: usize,
    cells: Vec<u16>,
}

impl PartialLatinSquare {
    pub fn empty(n: usize) -> Self {
        assert!(n > 0 && n <= MAX_ORDER, "unsupported order {n}");
        PartialLatinSquare { n, cells: vec![EMPTY; n * n] }
    }

    /// Builds a grid from rows, checking ranges but not uniqueness.
    pub fn from_rows_unchecked(rows: &[Vec<Option<usize>>]) -> Result<Self> {
        let n = rows.len();
        check_order(n)?;
        let mut p = Self::empty(n);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::OrderMismatch { expected: n, found: row.len() });
            }
            for (c, &v) in row.iter().enumerate() {
                if let Some(s) = v {
                    if s >= n {
                        return Err(Error::SymbolOutOfRange { symbol: s, n });
                    }
                }
                p.set(r, c, v);
            }
        }
        Ok(p)
    }

    /// Builds a grid from rows and rejects it unless it is a valid PLS.
    pub fn from_rows(rows: &[Vec<Option<usize>>]) -> Result<Self> {
        let p = Self::from_rows_unchecked(rows)?;
        let report = crate::verify::validate_pls(&p);
        if !report.is_valid() {
            return Err(Error::NotPartialLatin(report.to_string()));
        }
        Ok(p)
    }

    /// Builds a grid from `(row, col, symbol)` entries, rejecting invalid PLS.
    pub fn from_entries(n: usize, entries: &[(usize, usize, usize)]) -> Result<Self> {
        check_order(n)?;
        let mut p = Self::empty(n);
        for &(r, c, s) in entries {
            if r >= n || c >= n {
                return Err(Error::CellOutOfRange { cell: CellRef::new(r, c), n });
            }
            if s >= n {
                return Err(Error::SymbolOutOfRange { symbol: s, n });
            }
            if p.get(r, c).is_some() {
                return Err(Error::NotPartialLatin(format!(
                    "cell {} listed twice",
                    CellRef::new(r, c)
                )));
            }
            p.set(r, c, Some(s));
        }
        let report = crate::verify::validate_pls(&p);
        if !report.is_valid() {
            return Err(Error::NotPartialLatin(report.to_string()));
        }
        Ok(p)
    }

    pub fn order(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Option<usize> {
        let v = self.cells[r * self.n + c];
        (v != EMPTY).then_some(v as usize)
    }

    #[inline]
    pub fn at(&self, cell: CellRef) -> Option<usize> {
        self.get(cell.row, cell.col)
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Option<usize>) {
        debug_assert!(v.is_none_or(|s| s < self.n));
        self.cells[r * self.n + c] = v.map_or(EMPTY, |s| s as u16);
    }

    /// Non-empty cells in row-major order with their symbols.
    pub fn entries(&self) -> impl Iterator<Item = (CellRef, usize)> + '_ {
        let n = self.n;
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != EMPTY)
            .map(move |(i, &v)| (CellRef::new(i / n, i % n), v as usize))
    }

    pub fn filled_count(&self) -> usize {
        self.cells.iter().filter(|&&v| v != EMPTY).count()
    }

    pub fn is_complete(&self) -> bool {
        self.cells.iter().all(|&v| v != EMPTY)
    }

    pub fn transpose(&self) -> Self {
        let n = self.n;
        let mut t = Self::empty(n);
        for r in 0..n {
            for c in 0..n {
                t.cells[c * n + r] = self.cells[r * n + c];
            }
        }
        t
    }

    /// Converts a complete, valid grid into a [`LatinSquare`].
    pub fn to_latin(&self) -> Result<LatinSquare> {
        if !self.is_complete() {
            return Err(Error::NotLatin("grid has empty cells".into()));
        }
        LatinSquare::from_flat(self.n, self.cells.iter().map(|&v| v as usize).collect())
    }

    pub fn rows(&self) -> Vec<Vec<Option<usize>>> {
        (0..self.n).map(|r| (0..self.n).map(|c| self.get(r, c)).collect()).collect()
    }
}

impl fmt::Debug for PartialLatinSquare {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "PartialLatinSquare(n={})", self.n)?;
        for r in 0..self.n {
            let row: Vec<String> = (0..self.n)
                .map(|c| self.get(r, c).map_or(".".to_string(), |s| (s + 1).to_string()))
                .collect();
            writeln!(f, "  {}", row.join(" "))?;
        }
        Ok(())
    }
}

/// A complete Latin square with symbol-position lookups in both directions.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct LatinSquare {
    n: usize,
    cells: Vec<u16>,
    /// `row_pos[r * n + s]` is the column of symbol `s` in row `r`.
    row_pos: Vec<u16>,
    /// `col_pos[c * n + s]` is the row of symbol `s` in column `c`.
    col_pos: Vec<u16>,
}

impl LatinSquare {
    pub fn from_rows(rows: &[Vec<usize>]) -> Result<Self> {
        let n = rows.len();
        check_order(n)?;
        let mut flat = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::OrderMismatch { expected: n, found: row.len() });
            }
            flat.extend_from_slice(row);
        }
        Self::from_flat(n, flat)
    }

    /// Builds from a row-major vector, validating the Latin property.
    pub fn from_flat(n: usize, flat: Vec<usize>) -> Result<Self> {
        check_order(n)?;
        if flat.len() != n * n {
            return Err(Error::OrderMismatch { expected: n * n, found: flat.len() });
        }
        let mut row_pos = vec![EMPTY; n * n];
        let mut col_pos = vec![EMPTY; n * n];
        for r in 0..n {
            for c in 0..n {
                let s = flat[r * n + c];
                if s >= n {
                    return Err(Error::SymbolOutOfRange { symbol: s, n });
                }
                if row_pos[r * n + s] != EMPTY {
                    return Err(Error::NotLatin(format!(
                        "symbol {} repeated in row {}",
                        s + 1,
                        r + 1
                    )));
                }
                if col_pos[c * n + s] != EMPTY {
                    return Err(Error::NotLatin(format!(
                        "symbol {} repeated in column {}",
                        s + 1,
                        c + 1
                    )));
                }
                row_pos[r * n + s] = c as u16;
                col_pos[c * n + s] = r as u16;
            }
        }
        Ok(LatinSquare { n, cells: flat.into_iter().map(|s| s as u16).collect(), row_pos, col_pos })
    }

    /// Builds `L(i, j) = f(i, j)` and validates it.
    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> usize) -> Result<Self> {
        let flat = (0..n * n).map(|i| f(i / n, i % n)).collect();
        Self::from_flat(n, flat)
    }

    /// The cyclic square `L(i, j) = (i + j) mod n`.
    pub fn cyclic(n: usize) -> Self {
        Self::from_fn(n, |i, j| (i + j) % n).expect("cyclic square is Latin")
    }

    pub fn order(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> usize {
        self.cells[r * self.n + c] as usize
    }

    #[inline]
    pub fn at(&self, cell: CellRef) -> usize {
        self.get(cell.row, cell.col)
    }

    /// Column holding symbol `s` in row `r`.
    #[inline]
    pub fn col_of(&self, r: usize, s: usize) -> usize {
        self.row_pos[r * self.n + s] as usize
    }

    /// Row holding symbol `s` in column `c`.
    #[inline]
    pub fn row_of(&self, c: usize, s: usize) -> usize {
        self.col_pos[c * self.n + s] as usize
    }

    pub fn rows(&self) -> Vec<Vec<usize>> {
        (0..self.n).map(|r| (0..self.n).map(|c| self.get(r, c)).collect()).collect()
    }

    pub fn to_partial(&self) -> PartialLatinSquare {
        PartialLatinSquare { n: self.n, cells: self.cells.clone() }
    }

    pub fn transpose(&self) -> Self {
        LatinSquare {
            n: self.n,
            cells: {
                let n = self.n;
                let mut t = vec![0u16; n * n];
                for r in 0..n {
                    for c in 0..n {
                        t[c * n + r] = self.cells[r * n + c];
                    }
                }
                t
            },
            row_pos: self.col_pos.clone(),
            col_pos: self.row_pos.clone(),
        }
    }

    /// Returns a new square with `trade` applied.
    pub fn apply_trade(&self, trade: &Trade) -> Result<LatinSquare> {
        let mut out = self.clone();
        out.apply_trade_in_place(trade)?;
        Ok(out)
    }

    /// Applies `trade` in place; on error the square is left unchanged.
    ///
    /// A Latin row stays Latin after replacing some entries exactly when the
    /// removed and added symbols agree as multisets, and likewise for columns.
    pub fn apply_trade_in_place(&mut self, trade: &Trade) -> Result<()> {
        let n = self.n;
        for e in trade.entries() {
            if e.cell.row >= n || e.cell.col >= n {
                return Err(Error::CellOutOfRange { cell: e.cell, n });
            }
            if e.new >= n {
                return Err(Error::SymbolOutOfRange { symbol: e.new, n });
            }
            let found = self.at(e.cell);
            if found != e.old {
                return Err(Error::OldMismatch { cell: e.cell, expected: e.old, found });
            }
        }
        if !balanced(trade, |c| c.row) || !balanced(trade, |c| c.col) {
            return Err(Error::NotLatinAfterTrade);
        }
        for e in trade.entries() {
            let (r, c) = (e.cell.row, e.cell.col);
            self.cells[r * n + c] = e.new as u16;
            self.row_pos[r * n + e.new] = c as u16;
            self.col_pos[c * n + e.new] = r as u16;
        }
        debug_assert!(self.check_maps());
        Ok(())
    }

    /// Full consistency check of the position maps; used in debug assertions and tests.
    pub fn check_maps(&self) -> bool {
        let n = self.n;
        (0..n).all(|r| {
            (0..n).all(|c| {
                let s = self.get(r, c);
                self.col_of(r, s) == c && self.row_of(c, s) == r
            })
        })
    }
}

/// Per-line multiset balance of removed versus added symbols.
fn balanced(trade: &Trade, line: impl Fn(CellRef) -> usize) -> bool {
    let mut delta: Vec<(usize, usize, i32)> = Vec::with_capacity(trade.len() * 2);
    for e in trade.entries() {
        delta.push((line(e.cell), e.old, -1));
        delta.push((line(e.cell), e.new, 1));
    }
    delta.sort_unstable_by_key(|&(l, s, _)| (l, s));
    let mut i = 0;
    while i < delta.len() {
        let key = (delta[i].0, delta[i].1);
        let mut sum = 0;
        while i < delta.len() && (delta[i].0, delta[i].1) == key {
            sum += delta[i].2;
            i += 1;
        }
        if sum != 0 {
            return false;
        }
    }
    true
}

impl fmt::Debug for LatinSquare {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "LatinSquare(n={})", self.n)?;
        for r in 0..self.n {
            let row: Vec<String> = (0..self.n).map(|c| (self.get(r, c) + 1).to_string()).collect();
            writeln!(f, "  {}", row.join(" "))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicate_in_row() {
        let err = LatinSquare::from_rows(&[vec![0, 0], vec![1, 1]]).unwrap_err();
        assert!(matches!(err, Error::NotLatin(_)));
    }

    #[test]
    fn position_maps_agree() {
        let l = LatinSquare::cyclic(7);
        assert!(l.check_maps());
        assert_eq!(l.col_of(2, 5), 3);
        assert_eq!(l.row_of(3, 5), 2);
        assert!(l.transpose().check_maps());
    }

    #[test]
    fn trade_breaking_latin_is_rejected() {
        let l = LatinSquare::cyclic(3);
        let t = Trade::new(vec![crate::TradeEntry { cell: CellRef::new(0, 0), old: 0, new: 1 }]).unwrap();
        assert_eq!(l.apply_trade(&t).unwrap_err(), Error::NotLatinAfterTrade);
    }

    #[test]
    fn old_mismatch_is_reported() {
        let l = LatinSquare::cyclic(3);
        let t = Trade::new(vec![crate::TradeEntry { cell: CellRef::new(0, 0), old: 2, new: 1 }]).unwrap();
        assert!(matches!(l.apply_trade(&t), Err(Error::OldMismatch { .. })));
    }

    #[test]
    fn partial_from_entries_rejects_column_clash() {
        let err = PartialLatinSquare::from_entries(3, &[(0, 0, 1), (2, 0, 1)]).unwrap_err();
        assert!(matches!(err, Error::NotPartialLatin(_)));
    }
}
