//! Step II: permute the inputs until the starting square is well-behaved.
//!
//! The starting square stays fixed; the inputs are pulled into its frame by
//! `A'(i, j) = A(σ(i), τ(j))` and likewise for P. A square built in that frame
//! is pushed back by [`unscramble`].

use rand::seq::SliceRandom;
use rand::Rng;

use crate::array::AvoidanceArray;
use crate::error::{Error, Result};
use crate::intercalate::{all_intercalates, is_strong_pair, Intercalate};
use crate::params::Params;
use crate::square::{CellRef, LatinSquare, PartialLatinSquare};
use crate::starting::StartingSquare;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Scramble {
    pub sigma: Vec<usize>,
    pub tau: Vec<usize>,
}

impl Scramble {
    pub fn identity(n: usize) -> Self {
        Scramble { sigma: (0..n).collect(), tau: (0..n).collect() }
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut sigma: Vec<usize> = (0..n).collect();
        let mut tau: Vec<usize> = (0..n).collect();
        sigma.shuffle(rng);
        tau.shuffle(rng);
        Scramble { sigma, tau }
    }

    pub fn from_perms(sigma: Vec<usize>, tau: Vec<usize>) -> Result<Self> {
        for p in [&sigma, &tau] {
            let mut seen = vec![false; p.len()];
            for &x in p.iter() {
                if x >= p.len() || std::mem::replace(&mut seen[x], true) {
                    return Err(Error::Parse("not a permutation".into()));
                }
            }
        }
        if sigma.len() != tau.len() {
            return Err(Error::OrderMismatch { expected: sigma.len(), found: tau.len() });
        }
        Ok(Scramble { sigma, tau })
    }

    pub fn order(&self) -> usize {
        self.sigma.len()
    }

    /// `P'(i, j) = P(σ(i), τ(j))`.
    pub fn pull_partial(&self, p: &PartialLatinSquare) -> PartialLatinSquare {
        let n = p.order();
        let mut out = PartialLatinSquare::empty(n);
        for i in 0..n {
            for j in 0..n {
                out.set(i, j, p.get(self.sigma[i], self.tau[j]));
            }
        }
        out
    }

    /// `A'(i, j) = A(σ(i), τ(j))`.
    pub fn pull_array(&self, a: &AvoidanceArray) -> AvoidanceArray {
        let n = a.order();
        let mut out = AvoidanceArray::empty(n);
        for i in 0..n {
            for j in 0..n {
                for s in a.symbols(self.sigma[i], self.tau[j]) {
                    out.insert(i, j, s);
                }
            }
        }
        out
    }

    pub fn pull_square(&self, l: &LatinSquare) -> LatinSquare {
        LatinSquare::from_fn(l.order(), |i, j| l.get(self.sigma[i], self.tau[j])).expect("permuted square is Latin")
    }

    /// Inverse of the pull maps on cells: frame cell `(i, j)` is problem cell `(σ(i), τ(j))`.
    pub fn push_cell(&self, cell: CellRef) -> CellRef {
        CellRef::new(self.sigma[cell.row], self.tau[cell.col])
    }
}

/// `result(σ(i), τ(j)) = L(i, j)`; undoes [`Scramble::pull_square`].
pub fn unscramble(l: &LatinSquare, s: &Scramble) -> LatinSquare {
    let n = l.order();
    let mut flat = vec![0usize; n * n];
    for i in 0..n {
        for j in 0..n {
            flat[s.sigma[i] * n + s.tau[j]] = l.get(i, j);
        }
    }
    LatinSquare::from_flat(n, flat).expect("permuted square is Latin")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WellBehavedReport {
    /// Non-exceptional cells below the allowed-strong-intercalate threshold.
    pub condition_a_violations: usize,
    pub condition_a_cells: Vec<CellRef>,
    pub max_row_conflicts: usize,
    pub max_col_conflicts: usize,
    pub max_symbol_conflicts: usize,
    pub max_symbol_prescriptions: usize,
    pub max_symbol_pair: usize,
    /// Violations of (a) plus the total excess over c(n) in (b)–(f).
    pub score: usize,
    pub pass: bool,
}

/// Strong intercalates of a starting square, enumerated once and reused across tries.
#[derive(Clone, Debug)]
pub struct StrongIndex {
    items: Vec<(Intercalate, usize, usize)>,
}

impl StrongIndex {
    pub fn new(l0: &LatinSquare) -> Self {
        let n = l0.order();
        let items = all_intercalates(l0)
            .into_iter()
            .filter_map(|c| {
                let [a, b, _, _] = c.cells();
                let (x, y) = (l0.at(a), l0.at(b));
                is_strong_pair(n, x, y).then_some((c, x, y))
            })
            .collect();
        StrongIndex { items }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Per-cell count of strong intercalates that are allowed with respect to `a`.
    pub fn allowed_counts(&self, l0: &LatinSquare, a: &AvoidanceArray) -> Vec<usize> {
        let n = l0.order();
        let mut counts = vec![0usize; n * n];
        for (c, x, y) in &self.items {
            let allowed = c.cells().iter().all(|&cell| {
                let new = if l0.at(cell) == *x { *y } else { *x };
                !a.contains_at(cell, new)
            });
            if allowed {
                for cell in c.cells() {
                    counts[cell.index(n)] += 1;
                }
            }
        }
        counts
    }
}

pub fn check_well_behaved(
    l0: &StartingSquare,
    a: &AvoidanceArray,
    p: &PartialLatinSquare,
    params: &Params,
) -> WellBehavedReport {
    check_with_index(&StrongIndex::new(&l0.square), l0, a, p, params)
}

pub fn check_with_index(
    index: &StrongIndex,
    l0: &StartingSquare,
    a: &AvoidanceArray,
    p: &PartialLatinSquare,
    params: &Params,
) -> WellBehavedReport {
    let l = &l0.square;
    let n = l.order();
    let c_bound = params.c(n);
    let half = n / 2;

    let counts = index.allowed_counts(l, a);
    let mut condition_a_cells = Vec::new();
    for r in 0..n {
        for c in 0..n {
            let cell = CellRef::new(r, c);
            let k = counts[cell.index(n)];
            // k >= floor(n/2) - eps*n, exactly.
            if k < half && params.epsilon.exceeded_by(half - k, n) && !l0.exceptional_cells.contains(&cell) {
                condition_a_cells.push(cell);
            }
        }
    }

    let (mut rows, mut cols, mut syms, mut pres) = (vec![0usize; n], vec![0usize; n], vec![0usize; n], vec![0usize; n]);
    let mut pair = vec![0u32; n * n];
    for r in 0..n {
        for c in 0..n {
            let s = l.get(r, c);
            if a.contains(r, c, s) {
                rows[r] += 1;
                cols[c] += 1;
                syms[s] += 1;
            }
            if p.get(r, c).is_some() {
                pres[s] += 1;
            }
            for (wi, &w) in a.cell_words(r, c).iter().enumerate() {
                let mut w = w;
                while w != 0 {
                    let t = wi * 64 + w.trailing_zeros() as usize;
                    pair[s * n + t] += 1;
                    w &= w - 1;
                }
            }
        }
    }
    let excess = |v: &[usize]| v.iter().map(|&x| x.saturating_sub(c_bound)).sum::<usize>();
    let max = |v: &[usize]| v.iter().copied().max().unwrap_or(0);
    let pair_max = pair.iter().copied().max().unwrap_or(0) as usize;
    let pair_excess: usize = pair.iter().map(|&x| (x as usize).saturating_sub(c_bound)).sum();
    let score = condition_a_cells.len() + excess(&rows) + excess(&cols) + excess(&syms) + excess(&pres) + pair_excess;
    WellBehavedReport {
        condition_a_violations: condition_a_cells.len(),
        condition_a_cells,
        max_row_conflicts: max(&rows),
        max_col_conflicts: max(&cols),
        max_symbol_conflicts: max(&syms),
        max_symbol_prescriptions: max(&pres),
        max_symbol_pair: pair_max,
        score,
        pass: score == 0,
    }
}

/// A sampled scramble with the pulled inputs and its report.
#[derive(Clone, Debug)]
pub struct ScrambleSample {
    pub scramble: Scramble,
    pub a_prime: AvoidanceArray,
    pub p_prime: PartialLatinSquare,
    pub report: WellBehavedReport,
    /// Tries used, counting the returned one.
    pub tries: usize,
}

/// Samples up to `max_scramble_tries` scrambles and returns the first that
/// passes, or else the best-scoring one (earliest on ties).
pub fn sample_scramble_best<R: Rng + ?Sized>(
    l0: &StartingSquare,
    a: &AvoidanceArray,
    p: &PartialLatinSquare,
    params: &Params,
    rng: &mut R,
) -> ScrambleSample {
    let n = l0.square.order();
    let index = StrongIndex::new(&l0.square);
    let tries = params.max_scramble_tries.max(1);
    let mut best: Option<ScrambleSample> = None;
    for t in 1..=tries {
        let scramble = Scramble::random(n, rng);
        let a_prime = scramble.pull_array(a);
        let p_prime = scramble.pull_partial(p);
        let report = check_with_index(&index, l0, &a_prime, &p_prime, params);
        let pass = report.pass;
        if best.as_ref().is_none_or(|b| report.score < b.report.score) {
            best = Some(ScrambleSample { scramble, a_prime, p_prime, report, tries: t });
        }
        if pass {
            break;
        }
    }
    let mut best = best.expect("at least one try");
    best.tries = if best.report.pass { best.tries } else { tries };
    best
}

/// As [`sample_scramble_best`], but failing with `ScrambleExhausted` when no sample passes.
pub fn sample_scramble<R: Rng + ?Sized>(
    l0: &StartingSquare,
    a: &AvoidanceArray,
    p: &PartialLatinSquare,
    params: &Params,
    rng: &mut R,
) -> Result<ScrambleSample> {
    let s = sample_scramble_best(l0, a, p, params, rng);
    if s.report.pass {
        Ok(s)
    } else {
        Err(Error::ScrambleExhausted { tries: s.tries, best_score: s.report.score })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::starting::build_even;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn unscramble_inverts_pull() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let l = build_even(8).unwrap().square;
        let s = Scramble::random(8, &mut rng);
        assert_eq!(unscramble(&s.pull_square(&l), &s), l);
        assert_eq!(unscramble(&l, &Scramble::identity(8)), l);
    }

    #[test]
    fn empty_inputs_pass_first_try() {
        let l0 = build_even(10).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = sample_scramble(&l0, &AvoidanceArray::empty(10), &PartialLatinSquare::empty(10), &Params::desk(), &mut rng)
            .unwrap();
        assert_eq!(s.tries, 1);
    }

    #[test]
    fn single_conflict_fails_b_when_c_is_zero() {
        let l0 = build_even(4).unwrap();
        let mut a = AvoidanceArray::empty(4);
        a.insert(0, 0, l0.square.get(0, 0));
        let mut params = Params::desk();
        params.c_of_n.min = 0;
        let rep = check_well_behaved(&l0, &a, &PartialLatinSquare::empty(4), &params);
        assert!(!rep.pass);
        assert_eq!(rep.max_row_conflicts, 1);
    }
}
