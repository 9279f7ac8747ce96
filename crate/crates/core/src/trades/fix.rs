//! Making one prescribed cell agree with its prescription.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::exchange::{exchange_on, Axis};
use super::{ExchangeRequest, Level, SolverState, Target};
use crate::error::{Error, Result};
use crate::intercalate::Intercalate;
use crate::params::FallbackPolicy;
use crate::pipeline::preflight::fix_feasibility_lhs;
use crate::square::{CellRef, LatinSquare};
use crate::trade::Trade;

/// A successful fix and the predicate level it needed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FixOutcome {
    pub trade: Trade,
    pub level: Level,
}

/// Donor rows examined per level.
const DONOR_LIMIT: usize = usize::MAX;
/// Successful constructions compared before the cheapest is returned.
const CANDIDATES: usize = 4;
/// Random auxiliary symbols tried after the preferred ones.
const AUX_TRIES: usize = 24;

/// Changes `L(cell)` to `P̂(cell)` by a trade of at most 69 cells.
///
/// Levels from `Strict` up to `max_level` are tried in turn. Under the strict
/// fallback policy the lemma's premises are checked first and their failure
/// is reported as `FeasibilityUnmet`.
pub fn fix_cell(st: &SolverState, cell: CellRef, max_level: Level, rng: &mut ChaCha8Rng) -> Result<FixOutcome> {
    let s2 = st.target.at(cell).ok_or_else(|| Error::PreconditionViolated(format!("cell {cell} is not prescribed")))?;
    let s1 = st.square.at(cell);
    if s1 == s2 {
        return Err(Error::PreconditionViolated(format!("cell {cell} already holds its prescription")));
    }
    if st.params.fallback_policy == FallbackPolicy::Strict {
        check_premises(st)?;
    }
    let mut last = Error::NoValidDonorCell;
    for level in Level::ALL.into_iter().filter(|&l| l <= max_level) {
        let short = direct_swap(st, cell, s1, s2, level)
            .or_else(|| two_swaps(st, cell, s1, s2, level))
            .or_else(|| line_exchange(st, cell, s2, level, rng));
        if let Some(trade) = short {
            return Ok(FixOutcome { trade, level });
        }
        match fix_at_level(st, cell, s1, s2, level, rng) {
            Ok(trade) => return Ok(FixOutcome { trade, level }),
            Err(e) => last = e,
        }
    }
    Err(last)
}

fn check_premises(st: &SolverState) -> Result<()> {
    let n = st.order();
    let lhs = fix_feasibility_lhs(&st.params, n);
    if lhs <= 1.0 {
        return Err(Error::FeasibilityUnmet(format!("fix-cell inequality: {lhs:.3} <= 1")));
    }
    let (c, f) = (st.params.c(n) as f64, st.params.f(n) as f64);
    let dn = st.params.d.times(n);
    let pres_cap = 2.0 * c + 2.0 * dn;
    let dist_cap = 4.0 * (c + dn + st.params.alpha.times(n) + f);
    let mut pres = vec![0usize; n];
    for (_, s) in st.target.entries() {
        pres[s] += 1;
    }
    let mut dist = vec![0usize; n];
    for r in 0..n {
        for col in 0..n {
            let x = CellRef::new(r, col);
            if st.is_disturbed(x) {
                dist[st.square.at(x)] += 1;
            }
        }
    }
    for s in 0..n {
        if pres[s] as f64 > pres_cap {
            return Err(Error::FeasibilityUnmet(format!("symbol {} prescribed {} times", s + 1, pres[s])));
        }
        if dist[s] as f64 > dist_cap {
            return Err(Error::FeasibilityUnmet(format!("symbol {} disturbed {} times", s + 1, dist[s])));
        }
    }
    Ok(())
}

/// The short fixes: a swap on the intercalate through `cell` that carries its
/// prescribed symbol (4 cells), or one preparatory swap that creates such an
/// intercalate followed by it (at most 8 cells). Tried at each level up to
/// `max_level`.
pub fn direct_fix(st: &SolverState, cell: CellRef, max_level: Level) -> Option<FixOutcome> {
    let s2 = st.target.at(cell)?;
    let s1 = st.square.at(cell);
    if s1 == s2 {
        return None;
    }
    Level::ALL.into_iter().filter(|&l| l <= max_level).find_map(|level| {
        direct_swap(st, cell, s1, s2, level)
            .or_else(|| two_swaps(st, cell, s1, s2, level))
            .map(|trade| FixOutcome { trade, level })
    })
}

/// One preparatory swap, then the swap through the target. The three
/// candidates put `s1` at the far corner, move `s2` within column `c1`, or
/// move `s2` within row `r1`.
fn two_swaps(st: &SolverState, target: CellRef, s1: usize, s2: usize, level: Level) -> Option<Trade> {
    let l = &st.square;
    let (r1, c1) = (target.row, target.col);
    let c3 = l.col_of(r1, s2);
    let r3 = l.row_of(c1, s2);
    let mut plans: Vec<[(usize, usize, usize, usize); 2]> = Vec::with_capacity(3);
    {
        let (rp, cp) = (l.row_of(c3, s1), l.col_of(r3, s1));
        plans.push([(r3, rp, c3, cp), (r1, r3, c1, c3)]);
    }
    {
        let rp = l.row_of(c3, s1);
        let cp = l.col_of(r3, l.get(rp, c1));
        plans.push([(r3, rp, c1, cp), (r1, rp, c1, c3)]);
    }
    {
        let cp = l.col_of(r3, s1);
        let rp = l.row_of(c3, l.get(r1, cp));
        plans.push([(r1, rp, c3, cp), (r1, r3, c1, cp)]);
    }
    let mut best: Option<Trade> = None;
    for plan in plans {
        let mut w = l.clone();
        let ok = plan.iter().all(|&(ra, rb, ca, cb)| {
            let Ok(c) = Intercalate::new(ra, rb, ca, cb) else { return false };
            match c.swap_trade(&w) {
                Ok(t) => w.apply_trade_in_place(&t).is_ok(),
                Err(_) => false,
            }
        });
        if !ok || w.at(target) != s2 {
            continue;
        }
        let t = Trade::between(l, &w);
        if level.checks_disturbance() && t.cells().any(|c| c != target && st.is_disturbed(c)) {
            continue;
        }
        if check_fix_postconditions(st, target, &t, level).is_ok()
            && best.as_ref().is_none_or(|b| damage(st, &t) < damage(st, b))
        {
            best = Some(t);
        }
    }
    best
}

/// The intercalate on rows `r1, r3` and columns `c1, c3`, when it exists and qualifies.
fn direct_swap(st: &SolverState, target: CellRef, s1: usize, s2: usize, level: Level) -> Option<Trade> {
    let l = &st.square;
    let (r1, c1) = (target.row, target.col);
    let c3 = l.col_of(r1, s2);
    let r3 = l.row_of(c1, s2);
    if l.get(r3, c3) != s1 {
        return None;
    }
    let far = CellRef::new(r3, c3);
    if st.is_prescribed(far) || (level.checks_disturbance() && st.is_disturbed(far)) {
        return None;
    }
    let trade = Intercalate::new(r1, r3, c1, c3).ok()?.swap_trade(l).ok()?;
    check_fix_postconditions(st, target, &trade, level).ok()?;
    Some(trade)
}

/// Exchanges the target with the cell holding its prescribed symbol, along
/// the target's row or column (at most 16 cells).
fn line_exchange(st: &SolverState, target: CellRef, s2: usize, level: Level, rng: &mut ChaCha8Rng) -> Option<Trade> {
    let l = &st.square;
    let mut req = ExchangeRequest::new(level).unchecked();
    req.allow_prescribed = Some(target);
    let row = (Axis::Row, target.row, target.col, l.col_of(target.row, s2));
    let col = (Axis::Col, target.col, target.row, l.row_of(target.col, s2));
    let mut best: Option<Trade> = None;
    for (axis, line, b1, b2) in [row, col] {
        let Some(t) = exchange_on(st, l, axis, line, b1, b2, &req, rng) else { continue };
        if check_fix_postconditions(st, target, &t, level).is_ok()
            && best.as_ref().is_none_or(|b| damage(st, &t) < damage(st, b))
        {
            best = Some(t);
        }
    }
    best
}

/// Geometry of one donor choice.
#[derive(Clone, Copy, Debug)]
struct Donor {
    r2: usize,
    r3: usize,
    r4: usize,
    c2: usize,
    c3: usize,
    c4: usize,
}

fn fix_at_level(
    st: &SolverState,
    target: CellRef,
    s1: usize,
    s2: usize,
    level: Level,
    rng: &mut ChaCha8Rng,
) -> Result<Trade> {
    let n = st.order();
    let l = &st.square;
    let (r1, c1) = (target.row, target.col);
    let c3 = l.col_of(r1, s2);
    let r3 = l.row_of(c1, s2);
    let mut rows: Vec<usize> = (0..n).filter(|&r| r != r1 && r != r3).collect();
    rows.shuffle(rng);
    let mut saw_donor = false;
    let mut last = Error::NoValidDonorCell;
    let mut best: Option<(usize, Trade)> = None;
    let mut found = 0;
    for &r4 in rows.iter().take(DONOR_LIMIT) {
        let c4 = l.col_of(r4, s1);
        if c4 == c3 {
            continue;
        }
        let donor = Donor { r2: l.row_of(c4, s2), r3, r4, c2: l.col_of(r4, s2), c3, c4 };
        if !donor_ok(st, target, s1, s2, donor, level) {
            continue;
        }
        saw_donor = true;
        match complete(st, target, s1, s2, donor, level, rng) {
            Ok(t) => {
                let cost = damage(st, &t);
                if best.as_ref().is_none_or(|(b, _)| cost < *b) {
                    best = Some((cost, t));
                }
                found += 1;
                if found >= CANDIDATES {
                    break;
                }
            }
            Err(e) => last = e,
        }
    }
    if let Some((_, t)) = best {
        return Ok(t);
    }
    if !saw_donor {
        return Err(Error::NoValidDonorCell);
    }
    Err(last)
}

/// Undisturbed cells a trade would disturb, then its size.
fn damage(st: &SolverState, t: &Trade) -> usize {
    let fresh = t.cells().filter(|&c| !st.is_disturbed(c)).count();
    fresh * 128 + t.len()
}

/// May `s` be written into `cell` without creating a new conflict?
fn may_put(st: &SolverState, sq: &LatinSquare, cell: CellRef, s: usize) -> bool {
    !st.forbidden.contains_at(cell, s) || st.forbidden.contains_at(cell, sq.at(cell))
}

fn donor_ok(st: &SolverState, target: CellRef, s1: usize, s2: usize, d: Donor, level: Level) -> bool {
    let l = &st.square;
    let (r1, c1) = (target.row, target.col);
    let Donor { r2, r3, r4, c2, c3, c4 } = d;
    if r2 == r1 || c2 == c1 {
        return false;
    }
    // The first cells of the four exchanges must not hold s1 or s2.
    let firsts = [CellRef::new(r1, c4), CellRef::new(r2, c3), CellRef::new(r3, c2), CellRef::new(r4, c1)];
    let fixed_cells = [CellRef::new(r4, c4), CellRef::new(r4, c2), CellRef::new(r2, c4)];
    for &x in firsts.iter().chain(&fixed_cells) {
        if st.is_prescribed(x) {
            return false;
        }
    }
    for &x in &firsts {
        let s = l.at(x);
        if s == s1 || s == s2 {
            return false;
        }
    }
    let puts = [
        (CellRef::new(r4, c4), s2),
        (CellRef::new(r3, c2), s2),
        (CellRef::new(r2, c3), s2),
        (CellRef::new(r4, c1), s1),
        (CellRef::new(r1, c4), s1),
    ];
    if puts.iter().any(|&(x, s)| !may_put(st, l, x, s)) {
        return false;
    }
    if level.checks_disturbance() && st.is_disturbed(CellRef::new(r4, c4)) {
        return false;
    }
    if level.checks_overload() {
        for &x in &firsts {
            if st.is_d_overloaded(Target::Symbol(l.at(x)))
                || st.is_d_overloaded(Target::Row(x.row))
                || st.is_d_overloaded(Target::Col(x.col))
            {
                return false;
            }
        }
    }
    true
}

/// One exchange placing `s` at `first`, run on the working square.
struct Placement {
    axis: Axis,
    first: CellRef,
}

impl Placement {
    fn line(&self) -> usize {
        match self.axis {
            Axis::Row => self.first.row,
            Axis::Col => self.first.col,
        }
    }

    fn pos(&self) -> usize {
        match self.axis {
            Axis::Row => self.first.col,
            Axis::Col => self.first.row,
        }
    }

    fn source(&self, w: &LatinSquare, s: usize) -> usize {
        match self.axis {
            Axis::Row => w.col_of(self.first.row, s),
            Axis::Col => w.row_of(self.first.col, s),
        }
    }
}

/// Moves `s` to each placement's first cell in turn; the placed cells are then protected.
fn place(
    st: &SolverState,
    w: &mut LatinSquare,
    protected: &mut BTreeSet<CellRef>,
    s: usize,
    placements: &[Placement],
    avoid: [usize; 2],
    level: Level,
    rng: &mut ChaCha8Rng,
) -> bool {
    let mut applied: Vec<Trade> = Vec::new();
    for p in placements {
        if w.at(p.first) != s {
            let mut req = ExchangeRequest::new(level).unchecked().avoiding(&avoid);
            req.protected = protected.clone();
            let from = p.source(w, s);
            let Some(t) = exchange_on(st, w, p.axis, p.line(), p.pos(), from, &req, rng) else {
                for t in applied.iter().rev() {
                    w.apply_trade_in_place(&t.inverse()).expect("undo of an applied trade");
                }
                return false;
            };
            w.apply_trade_in_place(&t).expect("exchange trades are Latin");
            applied.push(t);
        }
    }
    for p in placements {
        protected.insert(p.first);
    }
    true
}

fn aux_candidates(
    st: &SolverState,
    w: &LatinSquare,
    preferred: [CellRef; 2],
    s1: usize,
    s2: usize,
    must_allow: [CellRef; 2],
    rng: &mut ChaCha8Rng,
) -> Vec<usize> {
    let n = st.order();
    let mut out: Vec<usize> = preferred.iter().map(|&x| w.at(x)).collect();
    for _ in 0..AUX_TRIES {
        out.push(rng.gen_range(0..n));
    }
    let mut seen = BTreeSet::new();
    out.retain(|&s| {
        s != s1 && s != s2 && seen.insert(s) && must_allow.iter().all(|&x| may_put(st, &st.square, x, s))
    });
    out
}

#[allow(clippy::too_many_arguments)]
fn complete(
    st: &SolverState,
    target: CellRef,
    s1: usize,
    s2: usize,
    d: Donor,
    level: Level,
    rng: &mut ChaCha8Rng,
) -> Result<Trade> {
    let (r1, c1) = (target.row, target.col);
    let Donor { r2, r3, r4, c2, c3, c4 } = d;
    let avoid = [s1, s2];
    let mut w = st.square.clone();
    let mut protected = BTreeSet::new();

    // s3 goes to (r1,c4) and (r2,c3), turning I2 into an intercalate.
    let i2_firsts = [CellRef::new(r1, c4), CellRef::new(r2, c3)];
    let s3s = aux_candidates(st, &w, i2_firsts, s1, s2, [CellRef::new(r1, c3), CellRef::new(r2, c4)], rng);
    let i2 = [Placement { axis: Axis::Row, first: i2_firsts[0] }, Placement { axis: Axis::Col, first: i2_firsts[1] }];
    let placed_s3 = s3s.iter().any(|&s3| place(st, &mut w, &mut protected, s3, &i2, avoid, level, rng));
    if !placed_s3 {
        return Err(Error::NoAuxSymbol);
    }

    // s4 goes to (r3,c2) and (r4,c1), turning I1 into an intercalate.
    let i1_firsts = [CellRef::new(r3, c2), CellRef::new(r4, c1)];
    let s4s = aux_candidates(st, &w, i1_firsts, s1, s2, [CellRef::new(r3, c1), CellRef::new(r4, c2)], rng);
    let i1 = [Placement { axis: Axis::Row, first: i1_firsts[0] }, Placement { axis: Axis::Col, first: i1_firsts[1] }];
    let placed_s4 = s4s.iter().any(|&s4| place(st, &mut w, &mut protected, s4, &i1, avoid, level, rng));
    if !placed_s4 {
        return Err(Error::NoAuxSymbol);
    }

    for (ra, rb, ca, cb) in [(r3, r4, c1, c2), (r1, r2, c3, c4), (r1, r4, c1, c4)] {
        let c = Intercalate::new(ra, rb, ca, cb)?;
        let t = c.swap_trade(&w).map_err(|_| Error::NoAuxSymbol)?;
        w.apply_trade_in_place(&t)?;
    }
    let trade = Trade::between(&st.square, &w);
    check_fix_postconditions(st, target, &trade, level).map_err(Error::PreconditionViolated)?;
    Ok(trade)
}

/// Verifies the fix-cell guarantees of `trade` for `target` against the state.
pub fn check_fix_postconditions(
    st: &SolverState,
    target: CellRef,
    trade: &Trade,
    level: Level,
) -> std::result::Result<(), String> {
    let s2 = st.target.at(target).ok_or("target is not prescribed")?;
    let s1 = st.square.at(target);
    let Some(te) = trade.entries().iter().find(|e| e.cell == target) else {
        return Err("target cell untouched".into());
    };
    if te.new != s2 {
        return Err(format!("target receives {} instead of {}", te.new + 1, s2 + 1));
    }
    if trade.len() > 69 {
        return Err(format!("trade has {} cells", trade.len()));
    }
    let mut other_prescribed = 0;
    let (mut old_s1, mut old_s2) = (0, 0);
    for e in trade.entries() {
        if e.old != st.square.at(e.cell) {
            return Err(format!("stale old symbol at {}", e.cell));
        }
        if e.old == s1 {
            old_s1 += 1;
        }
        if e.old == s2 {
            old_s2 += 1;
        }
        if st.forbidden.contains_at(e.cell, e.new) && !st.forbidden.contains_at(e.cell, e.old) {
            return Err(format!("new conflict at {}", e.cell));
        }
        if e.cell != target {
            if let Some(p) = st.target.at(e.cell) {
                other_prescribed += 1;
                if p == e.old {
                    return Err(format!("fixed cell {} changed", e.cell));
                }
                if level.checks_overload() && st.is_d_overloaded(Target::Symbol(e.new)) {
                    return Err(format!("prescribed cell {} receives an overloaded symbol", e.cell));
                }
            }
            if level.checks_overload()
                && e.old != s1
                && e.old != s2
                && st.is_d_overloaded(Target::Symbol(e.old))
            {
                return Err(format!("overloaded symbol {} traded", e.old + 1));
            }
        }
    }
    if other_prescribed > 2 {
        return Err(format!("{other_prescribed} other prescribed cells changed"));
    }
    // The symbol counts bound the per-symbol tallies, so they belong to the overload tier.
    if level.checks_overload() {
        if old_s1 != 2 {
            return Err(format!("{old_s1} cells carried the old symbol"));
        }
        if old_s2 > 4 {
            return Err(format!("{old_s2} cells carried the new symbol"));
        }
    }
    st.square.apply_trade(trade).map(|_| ()).map_err(|e| e.to_string())
}
