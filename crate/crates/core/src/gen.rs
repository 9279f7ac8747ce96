//! Instance generators: the random models and the blocked infeasibility constructions.

use rand::seq::index::sample;
use rand::Rng;

use crate::array::AvoidanceArray;
use crate::error::{Error, Result};
use crate::square::PartialLatinSquare;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RandomPlsModel {
    pub n: usize,
    pub p: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RandomArrayModel {
    pub n: usize,
    pub m: usize,
}

/// Which symbol range the bottom-right block of E1 forbids.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum CBlock {
    /// `{2r+3, ..., 3r+2}`: r symbols, disjoint from the middle block.
    #[default]
    Corrected,
    /// `{2r+2, ..., 3r+2}`: the literal range; overlaps the middle block's range.
    Literal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FrontierPoint {
    pub r: usize,
    pub t: usize,
}

impl FrontierPoint {
    pub fn new(r: usize, t: usize) -> Result<Self> {
        if r == 0 || t == 0 || t > r + 1 {
            return Err(Error::PreconditionViolated(format!("need r >= 1 and 1 <= t <= r+1, got r={r}, t={t}")));
        }
        Ok(FrontierPoint { r, t })
    }

    pub fn order(&self) -> usize {
        3 * self.r + 2
    }

    /// The (alpha, beta) point the pair realises: `t/n` and `(ceil(n/3) - t)/n`.
    pub fn alpha_beta(&self) -> (f64, f64) {
        let n = self.order();
        let t = self.t as f64;
        (t / n as f64, (n.div_ceil(3) as f64 - t) / n as f64)
    }
}

/// Each cell is filled with probability `p` by a uniform symbol. Duplicates
/// are then removed: within a row only the right-most copy of a symbol is
/// kept, then within a column only the bottom-most copy.
pub fn random_pls<R: Rng + ?Sized>(model: RandomPlsModel, rng: &mut R) -> PartialLatinSquare {
    let n = model.n;
    let mut p = PartialLatinSquare::empty(n);
    let prob = model.p.clamp(0.0, 1.0);
    for r in 0..n {
        for c in 0..n {
            if rng.gen_bool(prob) {
                p.set(r, c, Some(rng.gen_range(0..n)));
            }
        }
    }
    let mut seen = vec![false; n];
    for r in 0..n {
        seen.fill(false);
        for c in (0..n).rev() {
            if let Some(s) = p.get(r, c) {
                if seen[s] {
                    p.set(r, c, None);
                } else {
                    seen[s] = true;
                }
            }
        }
    }
    for c in 0..n {
        seen.fill(false);
        for r in (0..n).rev() {
            if let Some(s) = p.get(r, c) {
                if seen[s] {
                    p.set(r, c, None);
                } else {
                    seen[s] = true;
                }
            }
        }
    }
    p
}

/// Each cell gets an independent uniform m-subset; entries of `p` are then removed.
pub fn random_array<R: Rng + ?Sized>(
    model: RandomArrayModel,
    rng: &mut R,
    p: Option<&PartialLatinSquare>,
) -> AvoidanceArray {
    let n = model.n;
    let m = model.m.min(n);
    let mut a = AvoidanceArray::empty(n);
    for r in 0..n {
        for c in 0..n {
            for s in sample(rng, n, m) {
                a.insert(r, c, s);
            }
        }
    }
    if let Some(p) = p {
        a.remove_entries_of(p);
    }
    a
}

/// The unavoidable array E1 of order n = 3r+2 (0-based symbols).
///
/// Top-left `(r+1)×(r+1)` block forbids `{0..=r}`, the middle `(r+1)×(r+1)`
/// block forbids `{r+1..=2r+1}`, and the bottom-right `r×r` block forbids the
/// range chosen by `variant`.
pub fn blocked_array_e1(r: usize, variant: CBlock) -> AvoidanceArray {
    assert!(r >= 1);
    let n = 3 * r + 2;
    let mut a = AvoidanceArray::empty(n);
    let mut fill = |rows: std::ops::Range<usize>, syms: std::ops::RangeInclusive<usize>| {
        for i in rows.clone() {
            for j in rows.clone() {
                for s in syms.clone() {
                    a.insert(i, j, s);
                }
            }
        }
    };
    fill(0..r + 1, 0..=r);
    fill(r + 1..2 * r + 2, r + 1..=2 * r + 1);
    let c_start = match variant {
        CBlock::Corrected => 2 * r + 2,
        CBlock::Literal => 2 * r + 1,
    };
    fill(2 * r + 2..n, c_start..=3 * r + 1);
    a
}

/// An s×s block over the symbols `S` with a partition into broken diagonals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecomposedBlock {
    /// `cells[i][j] = S[(i + j) mod s]`.
    pub cells: Vec<Vec<usize>>,
    /// `diagonals[j]` lists the cells `(i, (i + j) mod s)`.
    pub diagonals: Vec<Vec<(usize, usize)>>,
}

/// Cyclic block with its broken diagonals. For odd s each diagonal is an
/// S-transversal; for even s they are only generalized diagonals.
pub fn transversal_decomposed_square(symbols: &[usize]) -> DecomposedBlock {
    let s = symbols.len();
    assert!(s >= 1);
    let cells = (0..s).map(|i| (0..s).map(|j| symbols[(i + j) % s]).collect()).collect();
    let diagonals = (0..s).map(|j| (0..s).map(|i| (i, (i + j) % s)).collect()).collect();
    DecomposedBlock { cells, diagonals }
}

/// The pair (P, A) of the construction at `point`: P holds the first `t`
/// diagonals of the three blocks, A is E1 emptied on P's cells.
pub fn infeasible_pair(point: FrontierPoint, variant: CBlock) -> (PartialLatinSquare, AvoidanceArray) {
    let r = point.r;
    let n = point.order();
    let s1: Vec<usize> = std::iter::once(r + 1).chain(2 * r + 2..=3 * r + 1).collect();
    let s2: Vec<usize> = (0..=r).collect();
    let s3: Vec<usize> = (r + 2..=2 * r + 1).collect();
    let mut p = PartialLatinSquare::empty(n);
    for (offset, syms) in [(0, s1), (r + 1, s2), (2 * r + 2, s3)] {
        let block = transversal_decomposed_square(&syms);
        for diag in block.diagonals.iter().take(point.t) {
            for &(i, j) in diag {
                p.set(offset + i, offset + j, Some(block.cells[i][j]));
            }
        }
    }
    let mut a = blocked_array_e1(r, variant);
    for (cell, _) in p.entries() {
        a.clear_cell(cell.row, cell.col);
    }
    (p, a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::{is_mmm_array, validate_pls};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pls_extremes() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(random_pls(RandomPlsModel { n: 7, p: 0.0 }, &mut rng).filled_count(), 0);
        let one = random_pls(RandomPlsModel { n: 1, p: 1.0 }, &mut rng);
        assert_eq!(one.get(0, 0), Some(0));
        let dense = random_pls(RandomPlsModel { n: 12, p: 1.0 }, &mut rng);
        assert!(validate_pls(&dense).is_valid());
    }

    #[test]
    fn array_extremes() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        assert!(random_array(RandomArrayModel { n: 6, m: 0 }, &mut rng, None).is_all_empty());
        let p = PartialLatinSquare::from_entries(4, &[(1, 2, 3)]).unwrap();
        let a = random_array(RandomArrayModel { n: 4, m: 4 }, &mut rng, Some(&p));
        assert_eq!(a.total_len(), 16 * 4 - 1);
        assert!(!a.contains(1, 2, 3));
    }

    #[test]
    fn e1_order_five() {
        let lit = blocked_array_e1(1, CBlock::Literal);
        assert_eq!(lit.symbols(0, 0), vec![0, 1]);
        assert_eq!(lit.symbols(2, 3), vec![2, 3]);
        assert_eq!(lit.symbols(4, 4), vec![3, 4]);
        assert!(lit.symbols(0, 4).is_empty());
        assert!(is_mmm_array(&lit, 2, 2, 2));
        assert_eq!(blocked_array_e1(1, CBlock::Corrected).symbols(4, 4), vec![4]);
    }

    #[test]
    fn odd_block_diagonals_are_transversals() {
        let b = transversal_decomposed_square(&[3, 4, 5]);
        for d in &b.diagonals {
            let mut syms: Vec<usize> = d.iter().map(|&(i, j)| b.cells[i][j]).collect();
            syms.sort();
            assert_eq!(syms, vec![3, 4, 5]);
        }
        let mut all: Vec<_> = b.diagonals.concat();
        all.sort();
        all.dedup();
        assert_eq!(all.len(), 9);
    }

    #[test]
    fn pair_is_clean() {
        for (r, t) in [(1, 1), (1, 2), (2, 3), (3, 2)] {
            let (p, a) = infeasible_pair(FrontierPoint::new(r, t).unwrap(), CBlock::Corrected);
            assert!(validate_pls(&p).is_valid());
            assert!(a.clashes_with(&p).is_none());
            let e1 = blocked_array_e1(r, CBlock::Corrected);
            assert!(e1.clashes_with(&p).is_none());
        }
    }
}
