//! Report-valued validation and the predicates used by every other module.

use std::fmt;

use crate::array::AvoidanceArray;
use crate::params::Fraction;
use crate::square::{CellRef, LatinSquare, PartialLatinSquare};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    RowDuplicate { row: usize, symbol: usize },
    ColDuplicate { col: usize, symbol: usize },
    EmptyCell(CellRef),
    Completion { cell: CellRef, expected: usize, found: Option<usize> },
    Conflict { cell: CellRef, symbol: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Violation::RowDuplicate { row, symbol } => {
                write!(f, "symbol {} repeated in row {}", symbol + 1, row + 1)
            }
            Violation::ColDuplicate { col, symbol } => {
                write!(f, "symbol {} repeated in column {}", symbol + 1, col + 1)
            }
            Violation::EmptyCell(cell) => write!(f, "cell {cell} is empty"),
            Violation::Completion { cell, expected, found } => match found {
                Some(s) => write!(f, "cell {cell} holds {} but {} is prescribed", s + 1, expected + 1),
                None => write!(f, "cell {cell} is empty but {} is prescribed", expected + 1),
            },
            Violation::Conflict { cell, symbol } => {
                write!(f, "cell {cell} holds forbidden symbol {}", symbol + 1)
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Report {
    pub violations: Vec<Violation>,
}

impl Report {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn conflicts(&self) -> impl Iterator<Item = CellRef> + '_ {
        self.violations.iter().filter_map(|v| match v {
            Violation::Conflict { cell, .. } => Some(*cell),
            _ => None,
        })
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", parts.join("; "))
    }
}

/// Reports every duplicated symbol in a row or a column, each once.
pub fn validate_pls(p: &PartialLatinSquare) -> Report {
    let n = p.order();
    let mut violations = Vec::new();
    let mut count = vec![0usize; n];
    for r in 0..n {
        count.fill(0);
        for c in 0..n {
            if let Some(s) = p.get(r, c) {
                count[s] += 1;
                if count[s] == 2 {
                    violations.push(Violation::RowDuplicate { row: r, symbol: s });
                }
            }
        }
    }
    for c in 0..n {
        count.fill(0);
        for r in 0..n {
            if let Some(s) = p.get(r, c) {
                count[s] += 1;
                if count[s] == 2 {
                    violations.push(Violation::ColDuplicate { col: c, symbol: s });
                }
            }
        }
    }
    Report { violations }
}

/// Row, column and symbol usage counts of a partial square: maxima of each.
pub fn density_profile(p: &PartialLatinSquare) -> (usize, usize, usize) {
    let n = p.order();
    let (mut rows, mut cols, mut syms) = (vec![0usize; n], vec![0usize; n], vec![0usize; n]);
    for (cell, s) in p.entries() {
        rows[cell.row] += 1;
        cols[cell.col] += 1;
        syms[s] += 1;
    }
    let max = |v: &[usize]| v.iter().copied().max().unwrap_or(0);
    (max(&rows), max(&cols), max(&syms))
}

pub fn is_alpha_dense(p: &PartialLatinSquare, alpha: Fraction) -> bool {
    let n = p.order();
    let (r, c, s) = density_profile(p);
    alpha.bounds(r, n) && alpha.bounds(c, n) && alpha.bounds(s, n)
}

pub fn is_mmm_array(a: &AvoidanceArray, m1: usize, m2: usize, m3: usize) -> bool {
    let (x, y, z) = a.profile();
    x <= m1 && y <= m2 && z <= m3
}

/// Cells where the square holds a forbidden symbol, in row-major order.
pub fn conflict_cells(l: &LatinSquare, a: &AvoidanceArray) -> Vec<CellRef> {
    let n = l.order();
    let mut out = Vec::new();
    for r in 0..n {
        for c in 0..n {
            if a.contains(r, c, l.get(r, c)) {
                out.push(CellRef::new(r, c));
            }
        }
    }
    out
}

pub fn prescribed_cells(p: &PartialLatinSquare) -> Vec<CellRef> {
    p.entries().map(|(cell, _)| cell).collect()
}

/// Checks that `l` is a Latin square completing `p` and avoiding `a`.
///
/// `l` is taken as a possibly incomplete grid so that arbitrary candidate
/// files can be reported on.
pub fn verify_solution(l: &PartialLatinSquare, p: &PartialLatinSquare, a: &AvoidanceArray) -> Report {
    let n = l.order();
    let mut report = validate_pls(l);
    for r in 0..n {
        for c in 0..n {
            let cell = CellRef::new(r, c);
            let found = l.get(r, c);
            if found.is_none() {
                report.violations.push(Violation::EmptyCell(cell));
            }
            if let Some(expected) = p.get(r, c) {
                if found != Some(expected) {
                    report.violations.push(Violation::Completion { cell, expected, found });
                }
            }
            if let Some(s) = found {
                if a.contains(r, c, s) {
                    report.violations.push(Violation::Conflict { cell, symbol: s });
                }
            }
        }
    }
    report
}

pub fn verify_square(l: &LatinSquare, p: &PartialLatinSquare, a: &AvoidanceArray) -> Report {
    verify_solution(&l.to_partial(), p, a)
}
