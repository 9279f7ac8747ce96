//! Exhaustive restricted-completion search for small orders.
//!
//! Branching picks the tightest choice among empty cells (candidate symbols),
//! row/symbol pairs (candidate columns) and column/symbol pairs (candidate
//! rows). Fully deterministic.

use crate::array::AvoidanceArray;
use crate::error::{Error, Result};
use crate::square::{LatinSquare, PartialLatinSquare};

/// Largest order the bitset search supports.
pub const MAX_ORACLE_ORDER: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchLimits {
    pub max_nodes: u64,
    pub max_solutions: u64,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits { max_nodes: 50_000_000, max_solutions: u64::MAX }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExactOutcome {
    Solved(LatinSquare),
    Infeasible,
}

/// Finds one completion of `p` avoiding `a`, or proves none exists.
pub fn solve_exact(p: &PartialLatinSquare, a: &AvoidanceArray, limits: SearchLimits) -> Result<ExactOutcome> {
    let mut s = Search::new(p, a, limits)?;
    if !s.consistent {
        return Ok(ExactOutcome::Infeasible);
    }
    s.stop_at = 1;
    s.run()?;
    Ok(match s.first {
        Some(flat) => ExactOutcome::Solved(LatinSquare::from_flat(s.n, flat)?),
        None => ExactOutcome::Infeasible,
    })
}

/// Number of completions of `p` avoiding `a`.
pub fn count_exact(p: &PartialLatinSquare, a: &AvoidanceArray, limits: SearchLimits) -> Result<u64> {
    let mut s = Search::new(p, a, limits)?;
    if !s.consistent {
        return Ok(0);
    }
    s.stop_at = u64::MAX;
    s.run()?;
    Ok(s.found)
}

struct Search {
    n: usize,
    full: u64,
    grid: Vec<Option<usize>>,
    forbidden: Vec<u64>,
    row_used: Vec<u64>,
    col_used: Vec<u64>,
    empty: usize,
    nodes: u64,
    found: u64,
    stop_at: u64,
    limits: SearchLimits,
    first: Option<Vec<usize>>,
    consistent: bool,
}

enum Branch {
    Cell(usize, u64),
    RowSymbol(usize, usize, u64),
    ColSymbol(usize, usize, u64),
}

impl Search {
    fn new(p: &PartialLatinSquare, a: &AvoidanceArray, limits: SearchLimits) -> Result<Self> {
        let n = p.order();
        if a.order() != n {
            return Err(Error::OrderMismatch { expected: n, found: a.order() });
        }
        if n > MAX_ORACLE_ORDER {
            return Err(Error::UnsupportedOrder(n));
        }
        let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        let mut s = Search {
            n,
            full,
            grid: vec![None; n * n],
            forbidden: (0..n * n).map(|i| a.cell_words(i / n, i % n)[0]).collect(),
            row_used: vec![0; n],
            col_used: vec![0; n],
            empty: n * n,
            nodes: 0,
            found: 0,
            stop_at: 1,
            limits,
            first: None,
            consistent: true,
        };
        for (cell, sym) in p.entries() {
            let bit = 1u64 << sym;
            if s.row_used[cell.row] & bit != 0 || s.col_used[cell.col] & bit != 0 || s.forbidden[cell.index(n)] & bit != 0 {
                s.consistent = false;
            }
            s.place(cell.row, cell.col, sym);
        }
        Ok(s)
    }

    fn place(&mut self, r: usize, c: usize, sym: usize) {
        self.grid[r * self.n + c] = Some(sym);
        self.row_used[r] |= 1 << sym;
        self.col_used[c] |= 1 << sym;
        self.empty -= 1;
    }

    fn unplace(&mut self, r: usize, c: usize, sym: usize) {
        self.grid[r * self.n + c] = None;
        self.row_used[r] &= !(1 << sym);
        self.col_used[c] &= !(1 << sym);
        self.empty += 1;
    }

    #[inline]
    fn candidates(&self, r: usize, c: usize) -> u64 {
        self.full & !self.row_used[r] & !self.col_used[c] & !self.forbidden[r * self.n + c]
    }

    fn run(&mut self) -> Result<()> {
        self.dfs()?;
        Ok(())
    }

    /// Returns `Ok(true)` when the search should stop.
    fn dfs(&mut self) -> Result<bool> {
        if self.empty == 0 {
            self.found += 1;
            if self.first.is_none() {
                self.first = Some(self.grid.iter().map(|v| v.expect("complete")).collect());
            }
            if self.found >= self.limits.max_solutions && self.stop_at == u64::MAX {
                return Err(Error::LimitHit { nodes: self.nodes });
            }
            return Ok(self.found >= self.stop_at);
        }
        self.nodes += 1;
        if self.nodes > self.limits.max_nodes {
            return Err(Error::LimitHit { nodes: self.nodes });
        }
        let Some(branch) = self.choose() else { return Ok(false) };
        match branch {
            Branch::Cell(i, mut mask) => {
                let (r, c) = (i / self.n, i % self.n);
                while mask != 0 {
                    let sym = mask.trailing_zeros() as usize;
                    mask &= mask - 1;
                    self.place(r, c, sym);
                    let stop = self.dfs()?;
                    self.unplace(r, c, sym);
                    if stop {
                        return Ok(true);
                    }
                }
            }
            Branch::RowSymbol(r, sym, mut cols) => {
                while cols != 0 {
                    let c = cols.trailing_zeros() as usize;
                    cols &= cols - 1;
                    self.place(r, c, sym);
                    let stop = self.dfs()?;
                    self.unplace(r, c, sym);
                    if stop {
                        return Ok(true);
                    }
                }
            }
            Branch::ColSymbol(c, sym, mut rows) => {
                while rows != 0 {
                    let r = rows.trailing_zeros() as usize;
                    rows &= rows - 1;
                    self.place(r, c, sym);
                    let stop = self.dfs()?;
                    self.unplace(r, c, sym);
                    if stop {
                        return Ok(true);
                    }
                }
            }
        }
        Ok(false)
    }

    /// The branch with fewest options, or `None` on a dead end.
    fn choose(&self) -> Option<Branch> {
        let n = self.n;
        let mut cand = vec![0u64; n * n];
        let mut best: Option<(u32, Branch)> = None;
        for r in 0..n {
            for c in 0..n {
                if self.grid[r * n + c].is_some() {
                    continue;
                }
                let m = self.candidates(r, c);
                cand[r * n + c] = m;
                let k = m.count_ones();
                if k == 0 {
                    return None;
                }
                if best.as_ref().is_none_or(|(b, _)| k < *b) {
                    best = Some((k, Branch::Cell(r * n + c, m)));
                }
            }
        }
        if best.as_ref().is_some_and(|(b, _)| *b == 1) {
            return best.map(|(_, b)| b);
        }
        // Row/symbol and column/symbol placements.
        for r in 0..n {
            let mut missing = self.full & !self.row_used[r];
            while missing != 0 {
                let sym = missing.trailing_zeros() as usize;
                missing &= missing - 1;
                let mut cols = 0u64;
                for c in 0..n {
                    if self.grid[r * n + c].is_none() && cand[r * n + c] >> sym & 1 == 1 {
                        cols |= 1 << c;
                    }
                }
                let k = cols.count_ones();
                if k == 0 {
                    return None;
                }
                if best.as_ref().is_none_or(|(b, _)| k < *b) {
                    best = Some((k, Branch::RowSymbol(r, sym, cols)));
                }
            }
        }
        for c in 0..n {
            let mut missing = self.full & !self.col_used[c];
            while missing != 0 {
                let sym = missing.trailing_zeros() as usize;
                missing &= missing - 1;
                let mut rows = 0u64;
                for r in 0..n {
                    if self.grid[r * n + c].is_none() && cand[r * n + c] >> sym & 1 == 1 {
                        rows |= 1 << r;
                    }
                }
                let k = rows.count_ones();
                if k == 0 {
                    return None;
                }
                if best.as_ref().is_none_or(|(b, _)| k < *b) {
                    best = Some((k, Branch::ColSymbol(c, sym, rows)));
                }
            }
        }
        best.map(|(_, b)| b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::verify_square;

    fn lim() -> SearchLimits {
        SearchLimits::default()
    }

    #[test]
    fn order_one_forbidden() {
        let mut a = AvoidanceArray::empty(1);
        a.insert(0, 0, 0);
        assert_eq!(solve_exact(&PartialLatinSquare::empty(1), &a, lim()).unwrap(), ExactOutcome::Infeasible);
    }

    #[test]
    fn counts_match_enumeration() {
        assert_eq!(count_exact(&PartialLatinSquare::empty(2), &AvoidanceArray::empty(2), lim()).unwrap(), 2);
        assert_eq!(count_exact(&PartialLatinSquare::empty(3), &AvoidanceArray::empty(3), lim()).unwrap(), 12);
        assert_eq!(count_exact(&PartialLatinSquare::empty(4), &AvoidanceArray::empty(4), lim()).unwrap(), 576);
        let mut a = AvoidanceArray::empty(2);
        a.insert(0, 0, 0);
        assert_eq!(count_exact(&PartialLatinSquare::empty(2), &a, lim()).unwrap(), 1);
    }

    #[test]
    fn solution_verifies() {
        let p = PartialLatinSquare::from_entries(5, &[(0, 0, 2), (3, 1, 4)]).unwrap();
        let mut a = AvoidanceArray::empty(5);
        a.insert(1, 1, 0);
        a.insert(2, 2, 3);
        match solve_exact(&p, &a, lim()).unwrap() {
            ExactOutcome::Solved(l) => assert!(verify_square(&l, &p, &a).is_clean()),
            ExactOutcome::Infeasible => panic!("instance is feasible"),
        }
    }

    #[test]
    fn node_limit_reports() {
        let limits = SearchLimits { max_nodes: 3, max_solutions: u64::MAX };
        let r = count_exact(&PartialLatinSquare::empty(5), &AvoidanceArray::empty(5), limits);
        assert!(matches!(r, Err(Error::LimitHit { .. })));
    }
}
