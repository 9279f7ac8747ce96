//! Step IV: the trade engine.
//!
//! [`SolverState`] tracks the current square together with the disturbed
//! cells and the per-line and per-symbol trade tallies. [`row_exchange`] and
//! [`column_exchange`] swap the contents of two cells in a line; [`fix_cell`]
//! composes four exchanges and three intercalate swaps to make one prescribed
//! cell agree with its prescription.

mod exchange;
mod fix;

pub use exchange::{column_exchange, row_exchange, LinePair};
pub use fix::{check_fix_postconditions, direct_fix, fix_cell, FixOutcome};

use std::collections::BTreeSet;

use crate::array::AvoidanceArray;
use crate::error::Result;
use crate::params::Params;
use crate::square::{CellRef, LatinSquare, PartialLatinSquare};
use crate::trade::Trade;

/// Which optional predicates a search enforces. Levels are cumulative:
/// each one drops a further tier of predicates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Level {
    /// Every predicate of the lemmas.
    Strict,
    /// Overload predicates (symbols and lines not d-overloaded) dropped.
    NoOverload,
    /// Disturbance predicates (cells not L-disturbed) dropped as well.
    NoDisturbance,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::Strict, Level::NoOverload, Level::NoDisturbance];

    pub fn checks_overload(self) -> bool {
        self == Level::Strict
    }

    pub fn checks_disturbance(self) -> bool {
        self < Level::NoDisturbance
    }

    pub fn name(self) -> &'static str {
        match self {
            Level::Strict => "strict",
            Level::NoOverload => "no-overload",
            Level::NoDisturbance => "no-disturbance",
        }
    }
}

/// Constraints on an exchange beyond its two cells.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExchangeRequest {
    /// No traded cell may hold one of these symbols.
    pub avoid_symbols: Vec<usize>,
    /// Cells the trade must not touch.
    pub protected: BTreeSet<CellRef>,
    /// A prescribed cell the trade may still change (the cell being fixed).
    pub allow_prescribed: Option<CellRef>,
    pub level: Level,
    /// Fail with FeasibilityUnmet when the lemma's inequality does not hold.
    pub enforce_feasibility: bool,
}

impl ExchangeRequest {
    pub fn new(level: Level) -> Self {
        ExchangeRequest {
            avoid_symbols: Vec::new(),
            protected: BTreeSet::new(),
            allow_prescribed: None,
            level,
            enforce_feasibility: true,
        }
    }

    pub fn unchecked(mut self) -> Self {
        self.enforce_feasibility = false;
        self
    }

    pub fn avoiding(mut self, symbols: &[usize]) -> Self {
        self.avoid_symbols.extend_from_slice(symbols);
        self
    }
}

/// A row, a column or a symbol, for overload queries.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Target {
    Row(usize),
    Col(usize),
    Symbol(usize),
}

#[derive(Clone, Debug)]
pub struct SolverState {
    pub square: LatinSquare,
    pub start: LatinSquare,
    /// The merged prescriptions P̂.
    pub target: PartialLatinSquare,
    /// The pulled avoidance array A'.
    pub forbidden: AvoidanceArray,
    pub params: Params,
    disturbed: Vec<bool>,
    disturbed_count: usize,
    row_tally: Vec<usize>,
    col_tally: Vec<usize>,
    sym_tally: Vec<usize>,
    fixed: Vec<bool>,
    /// Trades applied so far.
    pub q: usize,
}

impl SolverState {
    /// `initially_disturbed` holds the exceptional cells and the cells that
    /// miss the intercalate threshold of the starting square.
    pub fn new(
        start: LatinSquare,
        initially_disturbed: impl IntoIterator<Item = CellRef>,
        target: PartialLatinSquare,
        forbidden: AvoidanceArray,
        params: Params,
    ) -> Self {
        let n = start.order();
        let mut disturbed = vec![false; n * n];
        let mut disturbed_count = 0;
        for cell in initially_disturbed {
            if !std::mem::replace(&mut disturbed[cell.index(n)], true) {
                disturbed_count += 1;
            }
        }
        let mut fixed = vec![false; n * n];
        for (cell, s) in target.entries() {
            fixed[cell.index(n)] = start.at(cell) == s;
        }
        SolverState {
            square: start.clone(),
            start,
            target,
            forbidden,
            params,
            disturbed,
            disturbed_count,
            row_tally: vec![0; n],
            col_tally: vec![0; n],
            sym_tally: vec![0; n],
            fixed,
            q: 0,
        }
    }

    pub fn order(&self) -> usize {
        self.square.order()
    }

    pub fn is_prescribed(&self, cell: CellRef) -> bool {
        self.target.at(cell).is_some()
    }

    pub fn is_fixed(&self, cell: CellRef) -> bool {
        self.fixed[cell.index(self.order())]
    }

    pub fn is_disturbed(&self, cell: CellRef) -> bool {
        self.disturbed[cell.index(self.order())]
    }

    pub fn disturbed_count(&self) -> usize {
        self.disturbed_count
    }

    pub fn fixed_count(&self) -> usize {
        self.fixed.iter().filter(|&&x| x).count()
    }

    pub fn tally(&self, t: Target) -> usize {
        match t {
            Target::Row(r) => self.row_tally[r],
            Target::Col(c) => self.col_tally[c],
            Target::Symbol(s) => self.sym_tally[s],
        }
    }

    /// More than `d·n` traded entries in the row, column or symbol.
    pub fn is_d_overloaded(&self, t: Target) -> bool {
        self.params.d.exceeded_by(self.tally(t), self.order())
    }

    pub fn is_conflict(&self, cell: CellRef) -> bool {
        self.forbidden.contains_at(cell, self.square.at(cell))
    }

    /// Prescribed cells that do not yet agree with P̂, in row-major order.
    pub fn unfixed_prescribed(&self) -> Vec<CellRef> {
        self.target.entries().filter(|&(cell, _)| !self.is_fixed(cell)).map(|(cell, _)| cell).collect()
    }

    /// Applies `trade` and updates all bookkeeping.
    pub fn record_trade(&mut self, trade: &Trade) -> Result<()> {
        self.square.apply_trade_in_place(trade)?;
        let n = self.order();
        for e in trade.entries() {
            let i = e.cell.index(n);
            if !std::mem::replace(&mut self.disturbed[i], true) {
                self.disturbed_count += 1;
            }
            self.row_tally[e.cell.row] += 1;
            self.col_tally[e.cell.col] += 1;
            self.sym_tally[e.old] += 1;
            self.sym_tally[e.new] += 1;
            if let Some(s) = self.target.at(e.cell) {
                self.fixed[i] = e.new == s;
            }
        }
        self.q += 1;
        Ok(())
    }

    /// Checks the state invariants; returns a description of the first failure.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let n = self.order();
        for r in 0..n {
            for c in 0..n {
                let cell = CellRef::new(r, c);
                if self.square.at(cell) != self.start.at(cell) && !self.is_disturbed(cell) {
                    return Err(format!("cell {cell} changed but is not disturbed"));
                }
                if self.is_conflict(cell) && (!self.is_prescribed(cell) || self.is_fixed(cell)) {
                    return Err(format!("conflict at {cell} outside unfixed prescribed cells"));
                }
                let should_fix = self.target.at(cell) == Some(self.square.at(cell));
                if self.is_fixed(cell) != should_fix {
                    return Err(format!("fixed flag wrong at {cell}"));
                }
            }
        }
        Ok(())
    }
}
