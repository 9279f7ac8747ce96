//! Exchanging the contents of two cells in one line.
//!
//! The search runs in a "view" of the square: for a row exchange the view is
//! the square itself, for a column exchange it is the transpose. View
//! coordinates are `(a, b)` = (line, position); every predicate is evaluated
//! on real cells.

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;

use super::{ExchangeRequest, SolverState, Target};
use crate::error::{Error, Result};
use crate::pipeline::preflight::exchange_feasibility_lhs;
use crate::square::{CellRef, LatinSquare};
use crate::trade::{Trade, TradeEntry};

/// Which two positions of the line to exchange.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LinePair {
    /// Exchange exactly these two positions (first, second).
    Fixed(usize, usize),
    /// Any admissible pair, tried in seeded random order.
    Any,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Axis {
    Row,
    Col,
}

#[derive(Clone, Copy)]
pub(crate) struct View<'a> {
    pub sq: &'a LatinSquare,
    pub axis: Axis,
}

impl<'a> View<'a> {
    #[inline]
    pub fn cell(&self, a: usize, b: usize) -> CellRef {
        match self.axis {
            Axis::Row => CellRef::new(a, b),
            Axis::Col => CellRef::new(b, a),
        }
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize) -> usize {
        self.sq.at(self.cell(a, b))
    }

    /// Position of `s` along line `a`.
    #[inline]
    pub fn along(&self, a: usize, s: usize) -> usize {
        match self.axis {
            Axis::Row => self.sq.col_of(a, s),
            Axis::Col => self.sq.row_of(a, s),
        }
    }

    /// Line holding `s` at position `b`.
    #[inline]
    pub fn across(&self, b: usize, s: usize) -> usize {
        match self.axis {
            Axis::Row => self.sq.row_of(b, s),
            Axis::Col => self.sq.col_of(b, s),
        }
    }
}

/// Pending changes on top of a square, small enough for linear lookup.
struct Overlay<'a> {
    base: &'a LatinSquare,
    changes: Vec<(CellRef, usize)>,
}

impl<'a> Overlay<'a> {
    fn new(base: &'a LatinSquare) -> Self {
        Overlay { base, changes: Vec::with_capacity(16) }
    }

    fn get(&self, cell: CellRef) -> usize {
        self.changes.iter().rev().find(|(c, _)| *c == cell).map_or_else(|| self.base.at(cell), |&(_, v)| v)
    }

    fn set(&mut self, cell: CellRef, v: usize) {
        if let Some(slot) = self.changes.iter_mut().find(|(c, _)| *c == cell) {
            slot.1 = v;
        } else {
            self.changes.push((cell, v));
        }
    }

    /// Swaps `[p, q, r, s]` = `[(a1,b1), (a1,b2), (a2,b1), (a2,b2)]` if it is an intercalate.
    fn swap(&mut self, cells: [CellRef; 4]) -> bool {
        let [p, q, r, s] = cells;
        let (x, y) = (self.get(p), self.get(q));
        if x == y || self.get(s) != x || self.get(r) != y {
            return false;
        }
        self.set(p, y);
        self.set(s, y);
        self.set(q, x);
        self.set(r, x);
        true
    }

    fn trade(&self) -> Trade {
        let entries = self
            .changes
            .iter()
            .filter_map(|&(cell, v)| {
                let old = self.base.at(cell);
                (old != v).then_some(TradeEntry { cell, old, new: v })
            })
            .collect();
        Trade::new(entries).expect("overlay cells are unique")
    }
}

fn exchanged(ov: &Overlay, firsts: [CellRef; 2], s1: usize, s2: usize) -> bool {
    ov.get(firsts[0]) == s2 && ov.get(firsts[1]) == s1
}

fn firsts_pos(v: View, cell: CellRef) -> usize {
    match v.axis {
        Axis::Row => cell.col,
        Axis::Col => cell.row,
    }
}

fn quad(v: View, a1: usize, a2: usize, b1: usize, b2: usize) -> [CellRef; 4] {
    [v.cell(a1, b1), v.cell(a1, b2), v.cell(a2, b1), v.cell(a2, b2)]
}

fn line_overloaded(st: &SolverState, v: View, a: usize) -> bool {
    st.is_d_overloaded(match v.axis {
        Axis::Row => Target::Row(a),
        Axis::Col => Target::Col(a),
    })
}

fn cross_overloaded(st: &SolverState, v: View, b: usize) -> bool {
    st.is_d_overloaded(match v.axis {
        Axis::Row => Target::Col(b),
        Axis::Col => Target::Row(b),
    })
}

/// Checks a candidate exchange trade against the request.
///
/// Hard predicates: at most 16 cells, no prescribed or protected cell, no
/// avoided symbol, no new conflict. Overload tier: no overloaded symbol, and
/// no overloaded line other than the exchanged one. Disturbance tier: no
/// disturbed cell besides the two exchanged ones.
pub(crate) fn exchange_trade_ok(
    st: &SolverState,
    v: View,
    a1: usize,
    firsts: [CellRef; 2],
    trade: &Trade,
    req: &ExchangeRequest,
) -> bool {
    if trade.len() > 16 || trade.is_empty() {
        return false;
    }
    let n = st.order();
    for e in trade.entries() {
        let prescribed = st.is_prescribed(e.cell) && req.allow_prescribed != Some(e.cell);
        if prescribed || req.protected.contains(&e.cell) || req.avoid_symbols.contains(&e.old) {
            return false;
        }
        if st.forbidden.contains_at(e.cell, e.new) && !st.forbidden.contains_at(e.cell, e.old) {
            return false;
        }
        if req.level.checks_overload() {
            if st.is_d_overloaded(Target::Symbol(e.old)) {
                return false;
            }
            let (line, pos) = match v.axis {
                Axis::Row => (e.cell.row, e.cell.col),
                Axis::Col => (e.cell.col, e.cell.row),
            };
            if (line != a1 && line_overloaded(st, v, line)) || cross_overloaded(st, v, pos) {
                return false;
            }
        }
        if req.level.checks_disturbance() && !firsts.contains(&e.cell) && st.is_disturbed(e.cell) {
            return false;
        }
    }
    debug_assert!(n > 0);
    true
}

/// The fast admissibility test for the two exchanged cells themselves.
fn pair_ok(st: &SolverState, v: View, a1: usize, b1: usize, b2: usize, req: &ExchangeRequest) -> bool {
    if b1 == b2 {
        return false;
    }
    let (p, q) = (v.cell(a1, b1), v.cell(a1, b2));
    let (s1, s2) = (v.get(a1, b1), v.get(a1, b2));
    let prescribed = |x: CellRef| st.is_prescribed(x) && req.allow_prescribed != Some(x);
    if prescribed(p) || prescribed(q) || req.protected.contains(&p) || req.protected.contains(&q) {
        return false;
    }
    if req.avoid_symbols.contains(&s1) || req.avoid_symbols.contains(&s2) {
        return false;
    }
    if st.forbidden.contains_at(p, s2) || st.forbidden.contains_at(q, s1) {
        return false;
    }
    if req.level.checks_overload()
        && (st.is_d_overloaded(Target::Symbol(s1))
            || st.is_d_overloaded(Target::Symbol(s2))
            || cross_overloaded(st, v, b1)
            || cross_overloaded(st, v, b2))
    {
        return false;
    }
    true
}

/// Maximum number of C4 candidates examined per C3 in Case 2.
const CASE2_INNER_LIMIT: usize = 64;

/// Searches for an exchange of positions `b1`, `b2` of line `a1` in view `v`.
pub(crate) fn exchange_in_view(
    st: &SolverState,
    v: View,
    a1: usize,
    b1: usize,
    b2: usize,
    req: &ExchangeRequest,
    rng: &mut ChaCha8Rng,
) -> Option<Trade> {
    if !pair_ok(st, v, a1, b1, b2, req) {
        return None;
    }
    let n = st.order();
    let firsts = [v.cell(a1, b1), v.cell(a1, b2)];
    let s1 = v.get(a1, b1);
    let s2 = v.get(a1, b2);
    let a3 = v.across(b1, s2);
    let a4 = v.across(b2, s1);
    let accept = |ov: &Overlay| {
        let t = ov.trade();
        (exchanged(ov, firsts, s1, s2) && exchange_trade_ok(st, v, a1, firsts, &t, req)).then_some(t)
    };

    if a3 == a4 {
        let mut ov = Overlay::new(v.sq);
        if ov.swap(quad(v, a1, a3, b1, b2)) {
            return accept(&ov);
        }
        return None;
    }

    let mut rows: Vec<usize> = (0..n).filter(|&a| a != a1 && a != a3 && a != a4).collect();
    rows.shuffle(rng);

    // Case 1: intercalates through (a3, b1) and (a4, b2) sharing line a2.
    for &a2 in &rows {
        let s3 = v.get(a2, b1);
        let b4 = v.along(a2, s2);
        if v.get(a3, b4) != s3 {
            continue;
        }
        let s4 = v.get(a2, b2);
        let b3 = v.along(a2, s1);
        if v.get(a4, b3) != s4 {
            continue;
        }
        let mut ov = Overlay::new(v.sq);
        if ov.swap(quad(v, a3, a2, b1, b4))
            && ov.swap(quad(v, a4, a2, b2, b3))
            && ov.swap(quad(v, a1, a2, b1, b2))
        {
            if let Some(t) = accept(&ov) {
                return Some(t);
            }
        }
    }

    // Case 2, in both orientations of the pair.
    for (b1, b2) in [(b1, b2), (b2, b1)] {
        if let Some(t) = case_two(st, v, a1, b1, b2, firsts, &rows, req, rng) {
            return Some(t);
        }
    }
    None
}

#[allow(clippy::too_many_arguments)]
fn case_two(
    st: &SolverState,
    v: View,
    a1: usize,
    b1: usize,
    b2: usize,
    firsts: [CellRef; 2],
    rows: &[usize],
    req: &ExchangeRequest,
    rng: &mut ChaCha8Rng,
) -> Option<Trade> {
    let n = st.order();
    let s1 = v.get(a1, b1);
    let s2 = v.get(a1, b2);
    let a3 = v.across(b1, s2);
    let a4 = v.across(b2, s1);
    let mut inner: Vec<usize> = (0..n).collect();
    for &a2 in rows {
        // C3 through (a4, b2) on line a2.
        let s4 = v.get(a2, b2);
        let b3 = v.along(a2, s1);
        if v.get(a4, b3) != s4 {
            continue;
        }
        let s3 = v.get(a2, b1);
        let b4 = v.along(a2, s2);
        let s5 = v.get(a3, b4);
        inner.shuffle(rng);
        let mut tried = 0;
        for &a6 in &inner {
            if a6 == a2 || a6 == a1 || a6 == a3 {
                continue;
            }
            // C4 = {(a2,b1), (a6,b1), (a6,b6), (a2,b6)} with s6 = L(a6, b1).
            let s6 = v.get(a6, b1);
            if [s1, s2, s3, s4].contains(&s6) {
                continue;
            }
            let b6 = v.along(a2, s6);
            if v.get(a6, b6) != s3 {
                continue;
            }
            // C5 = {(a3,b4), (a5,b4), (a5,b5), (a3,b5)} with L(a5, b4) = s6.
            let a5 = v.across(b4, s6);
            let b5 = v.along(a5, s5);
            if a5 == a3 || a5 == a1 || v.get(a3, b5) != s6 {
                continue;
            }
            tried += 1;
            let mut ov = Overlay::new(v.sq);
            if ov.swap(quad(v, a4, a2, b2, b3))
                && ov.swap(quad(v, a2, a6, b1, b6))
                && ov.swap(quad(v, a3, a5, b4, b5))
                && ov.swap(quad(v, a2, a3, b1, b4))
                && ov.swap(quad(v, a1, a2, b1, b2))
            {
                let t = ov.trade();
                if exchanged(&ov, firsts, v.get(a1, firsts_pos(v, firsts[0])), v.get(a1, firsts_pos(v, firsts[1])))
                    && exchange_trade_ok(st, v, a1, firsts, &t, req)
                {
                    return Some(t);
                }
            }
            if tried >= CASE2_INNER_LIMIT {
                break;
            }
        }
    }
    None
}

/// Maximum number of position pairs examined for [`LinePair::Any`].
const ANY_PAIR_LIMIT: usize = 200;

fn exchange(
    st: &SolverState,
    sq: &LatinSquare,
    axis: Axis,
    a1: usize,
    pair: LinePair,
    req: &ExchangeRequest,
    rng: &mut ChaCha8Rng,
) -> Result<Trade> {
    let n = st.order();
    if req.enforce_feasibility {
        let lhs = exchange_feasibility_lhs(&st.params, n, req.avoid_symbols.len());
        if lhs <= 6.0 {
            return Err(Error::FeasibilityUnmet(format!("exchange inequality: {lhs:.3} <= 6")));
        }
    }
    let v = View { sq, axis };
    match pair {
        LinePair::Fixed(b1, b2) => {
            exchange_in_view(st, v, a1, b1, b2, req, rng).ok_or(Error::NoValidColumns)
        }
        LinePair::Any => {
            let mut firsts: Vec<usize> = (0..n).collect();
            let mut seconds: Vec<usize> = (0..n).collect();
            firsts.shuffle(rng);
            let mut tried = 0;
            for &b1 in &firsts {
                seconds.shuffle(rng);
                for &b2 in &seconds {
                    if !pair_ok(st, v, a1, b1, b2, req) {
                        continue;
                    }
                    tried += 1;
                    if let Some(t) = exchange_in_view(st, v, a1, b1, b2, req, rng) {
                        return Ok(t);
                    }
                    if tried >= ANY_PAIR_LIMIT {
                        return Err(Error::NoValidColumns);
                    }
                }
            }
            Err(Error::NoValidColumns)
        }
    }
}

/// Exchanges the contents of two cells of row `r1` in the state's square.
///
/// The returned trade has at most 16 cells, touches no prescribed cell and
/// no cell holding an avoided symbol, creates no conflict, and after it
/// `L'(r1, c1) = L(r1, c2)` and `L'(r1, c2) = L(r1, c1)`.
pub fn row_exchange(
    st: &SolverState,
    r1: usize,
    columns: LinePair,
    req: &ExchangeRequest,
    rng: &mut ChaCha8Rng,
) -> Result<Trade> {
    exchange(st, &st.square, Axis::Row, r1, columns, req, rng)
}

/// The column analogue of [`row_exchange`].
pub fn column_exchange(
    st: &SolverState,
    c1: usize,
    rows: LinePair,
    req: &ExchangeRequest,
    rng: &mut ChaCha8Rng,
) -> Result<Trade> {
    exchange(st, &st.square, Axis::Col, c1, rows, req, rng)
}

/// Exchange on an arbitrary working square that shares the state's bookkeeping.
pub(crate) fn exchange_on(
    st: &SolverState,
    sq: &LatinSquare,
    axis: Axis,
    a1: usize,
    b1: usize,
    b2: usize,
    req: &ExchangeRequest,
    rng: &mut ChaCha8Rng,
) -> Option<Trade> {
    exchange_in_view(st, View { sq, axis }, a1, b1, b2, req, rng)
}
