//! Intercalates: 2×2 subsquares on two symbols.

use crate::array::AvoidanceArray;
use crate::error::{Error, Result};
use crate::square::{CellRef, LatinSquare};
use crate::trade::{Trade, TradeEntry};

/// Rows `(r1, r2)` and columns `(c1, c2)`, normalised so that `r1 < r2`, `c1 < c2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Intercalate {
    pub rows: (usize, usize),
    pub cols: (usize, usize),
}

impl Intercalate {
    pub fn new(r1: usize, r2: usize, c1: usize, c2: usize) -> Result<Self> {
        if r1 == r2 || c1 == c2 {
            return Err(Error::NotIntercalate);
        }
        Ok(Intercalate { rows: (r1.min(r2), r1.max(r2)), cols: (c1.min(c2), c1.max(c2)) })
    }

    pub fn cells(&self) -> [CellRef; 4] {
        let (r1, r2) = self.rows;
        let (c1, c2) = self.cols;
        [CellRef::new(r1, c1), CellRef::new(r1, c2), CellRef::new(r2, c1), CellRef::new(r2, c2)]
    }

    pub fn contains(&self, cell: CellRef) -> bool {
        (cell.row == self.rows.0 || cell.row == self.rows.1)
            && (cell.col == self.cols.0 || cell.col == self.cols.1)
    }

    /// Whether the four cells form an intercalate of `l`.
    pub fn is_in(&self, l: &LatinSquare) -> bool {
        let [a, b, c, d] = self.cells();
        l.at(a) == l.at(d) && l.at(b) == l.at(c)
    }

    /// The two symbols, checked to form an intercalate.
    pub fn symbols(&self, l: &LatinSquare) -> Result<(usize, usize)> {
        if !self.is_in(l) {
            return Err(Error::NotIntercalate);
        }
        let [a, b, _, _] = self.cells();
        Ok((l.at(a), l.at(b)))
    }

    /// The swap as a 4-cell trade.
    pub fn swap_trade(&self, l: &LatinSquare) -> Result<Trade> {
        let (x, y) = self.symbols(l)?;
        let entries = self
            .cells()
            .into_iter()
            .map(|cell| {
                let old = l.at(cell);
                TradeEntry { cell, old, new: if old == x { y } else { x } }
            })
            .collect();
        Trade::new(entries)
    }
}

/// Strong: exactly one of the two symbols lies below `floor(n / 2)` (0-based).
pub fn is_strong_pair(n: usize, a: usize, b: usize) -> bool {
    let half = n / 2;
    (a < half) != (b < half)
}

pub fn is_strong_intercalate(l: &LatinSquare, c: &Intercalate) -> Result<bool> {
    let (a, b) = c.symbols(l)?;
    Ok(is_strong_pair(l.order(), a, b))
}

/// Allowed: after the swap none of the four cells holds a forbidden symbol.
pub fn is_allowed_intercalate(l: &LatinSquare, c: &Intercalate, a: &AvoidanceArray) -> Result<bool> {
    let (x, y) = c.symbols(l)?;
    Ok(c.cells().iter().all(|&cell| {
        let new = if l.at(cell) == x { y } else { x };
        !a.contains_at(cell, new)
    }))
}

pub fn swap_intercalate(l: &LatinSquare, c: &Intercalate) -> Result<LatinSquare> {
    l.apply_trade(&c.swap_trade(l)?)
}

/// All intercalates through `cell`, found through the position maps in O(n).
pub fn intercalates_through(l: &LatinSquare, cell: CellRef) -> Vec<Intercalate> {
    let n = l.order();
    let (r, c) = (cell.row, cell.col);
    let a = l.get(r, c);
    let mut out = Vec::new();
    for c2 in 0..n {
        if c2 == c {
            continue;
        }
        let b = l.get(r, c2);
        let r2 = l.row_of(c, b);
        if l.get(r2, c2) == a {
            out.push(Intercalate::new(r, r2, c, c2).expect("distinct lines"));
        }
    }
    out
}

/// Every intercalate of `l`, each listed once. O(n^3).
pub fn all_intercalates(l: &LatinSquare) -> Vec<Intercalate> {
    let n = l.order();
    let mut out = Vec::new();
    for r in 0..n {
        for c in 0..n {
            let a = l.get(r, c);
            for c2 in c + 1..n {
                let b = l.get(r, c2);
                let r2 = l.row_of(c, b);
                if r2 > r && l.get(r2, c2) == a {
                    out.push(Intercalate { rows: (r, r2), cols: (c, c2) });
                }
            }
        }
    }
    out
}
