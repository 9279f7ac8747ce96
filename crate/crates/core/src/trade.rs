//! Trades: simultaneous replacement of entries mapping a Latin square to a Latin square.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::square::{CellRef, LatinSquare};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TradeEntry {
    pub cell: CellRef,
    pub old: usize,
    pub new: usize,
}

/// A set of cells with their old and new entries, sorted by cell.
///
/// Old symbols are kept so that application can be verified and reversed.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Trade {
    entries: Vec<TradeEntry>,
}

impl Trade {
    pub fn new(mut entries: Vec<TradeEntry>) -> Result<Self> {
        entries.sort_by_key(|e| e.cell);
        let mut seen = HashSet::new();
        for e in &entries {
            if e.old == e.new {
                return Err(Error::MalformedTrade(format!("entry at {} does not change", e.cell)));
            }
            if !seen.insert(e.cell) {
                return Err(Error::MalformedTrade(format!("cell {} repeated", e.cell)));
            }
        }
        Ok(Trade { entries })
    }

    /// The trade taking `from` to `to`; both must have the same order.
    pub fn between(from: &LatinSquare, to: &LatinSquare) -> Trade {
        assert_eq!(from.order(), to.order());
        let n = from.order();
        let mut entries = Vec::new();
        for r in 0..n {
            for c in 0..n {
                let (a, b) = (from.get(r, c), to.get(r, c));
                if a != b {
                    entries.push(TradeEntry { cell: CellRef::new(r, c), old: a, new: b });
                }
            }
        }
        Trade { entries }
    }

    pub fn entries(&self) -> &[TradeEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn cells(&self) -> impl Iterator<Item = CellRef> + '_ {
        self.entries.iter().map(|e| e.cell)
    }

    pub fn contains_cell(&self, cell: CellRef) -> bool {
        self.entries.binary_search_by_key(&cell, |e| e.cell).is_ok()
    }

    pub fn inverse(&self) -> Trade {
        Trade {
            entries: self
                .entries
                .iter()
                .map(|e| TradeEntry { cell: e.cell, old: e.new, new: e.old })
                .collect(),
        }
    }

    pub fn transposed(&self) -> Trade {
        let mut entries: Vec<_> = self
            .entries
            .iter()
            .map(|e| TradeEntry { cell: e.cell.transposed(), ..*e })
            .collect();
        entries.sort_by_key(|e| e.cell);
        Trade { entries }
    }

    pub fn to_record(&self) -> Vec<[usize; 4]> {
        self.entries
            .iter()
            .map(|e| [e.cell.row + 1, e.cell.col + 1, e.old + 1, e.new + 1])
            .collect()
    }
}

/// One line of a trade log, with 1-based values.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TradeLogLine {
    /// Reconstructs the frame the trades act on: the starting square of order
    /// `n` and the scramble that maps it back to the problem frame.
    Start { n: usize, odd_start: bool, sigma: Vec<usize>, tau: Vec<usize> },
    /// One applied trade: `[row, col, old, new]` per cell.
    Trade { step: usize, target: Option<[usize; 2]>, cells: Vec<[usize; 4]> },
    /// Solved directly by exhaustive search, no trades to replay.
    Exact { n: usize },
}

impl TradeLogLine {
    pub fn decode_trade(cells: &[[usize; 4]]) -> Result<Trade> {
        let mut entries = Vec::with_capacity(cells.len());
        for &[r, c, old, new] in cells {
            if r == 0 || c == 0 || old == 0 || new == 0 {
                return Err(Error::Parse("trade log values are 1-based".into()));
            }
            entries.push(TradeEntry { cell: CellRef::new(r - 1, c - 1), old: old - 1, new: new - 1 });
        }
        Trade::new(entries)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_undoes() {
        let l = LatinSquare::from_rows(&[vec![0, 1], vec![1, 0]]).unwrap();
        let t = Trade::between(&l, &LatinSquare::from_rows(&[vec![1, 0], vec![0, 1]]).unwrap());
        assert_eq!(t.len(), 4);
        let l2 = l.apply_trade(&t).unwrap();
        assert_eq!(l2.apply_trade(&t.inverse()).unwrap(), l);
    }

    #[test]
    fn rejects_noop_entry() {
        let e = TradeEntry { cell: CellRef::new(0, 0), old: 1, new: 1 };
        assert!(Trade::new(vec![e]).is_err());
    }

    #[test]
    fn log_line_roundtrip() {
        let line = TradeLogLine::Trade { step: 3, target: Some([1, 2]), cells: vec![[1, 1, 2, 3]] };
        let s = serde_json::to_string(&line).unwrap();
        assert_eq!(serde_json::from_str::<TradeLogLine>(&s).unwrap(), line);
    }
}
