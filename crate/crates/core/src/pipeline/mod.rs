//! The end-to-end solver: starting square, scramble, colouring, fix loop, unscramble.

pub mod preflight;

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::array::AvoidanceArray;
use crate::coloring::{build_conflict_graph, build_lists, build_r_and_merge, list_edge_color_bounded};
use crate::error::{Error, Result};
use crate::oracle::{solve_exact, ExactOutcome, SearchLimits};
use crate::params::{FallbackPolicy, Params};
use crate::scramble::{sample_scramble_best, unscramble};
use crate::square::{CellRef, LatinSquare, PartialLatinSquare};
use crate::starting::{build_even, build_odd_uncertified, StartingSquare};
use crate::trade::TradeLogLine;
use crate::trades::{direct_fix, fix_cell, FixOutcome, Level, SolverState};
use crate::verify::{validate_pls, verify_square};

pub use preflight::{preflight, Check, PreflightReport};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolveResult {
    Solved(LatinSquare),
    Infeasible,
    GaveUp(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Every inequality of the construction holds for this order.
    Guaranteed,
    BestEffort,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    Oracle,
    Construction,
}

/// Wall-clock milliseconds per phase. Not part of the determinism contract.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub start_ms: f64,
    pub scramble_ms: f64,
    pub coloring_ms: f64,
    pub trades_ms: f64,
    pub total_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveStats {
    pub n: usize,
    pub mode: Mode,
    pub route: Route,
    pub outcome: String,
    /// Scramble samples drawn across all attempts.
    pub scramble_tries: usize,
    /// Score of the scramble used by the final attempt (0 when well-behaved).
    pub scramble_score: usize,
    pub restarts: usize,
    pub conflict_edges: usize,
    pub prescribed_cells: usize,
    pub exceptional_cells: usize,
    /// Trades applied in the final attempt.
    pub q: usize,
    pub fix_calls: usize,
    pub failed_fix_calls: usize,
    pub disturbed_cells: usize,
    /// Named relaxations used, in order of first use.
    pub relaxations: Vec<String>,
}

impl SolveStats {
    fn new(n: usize, mode: Mode, route: Route) -> Self {
        SolveStats {
            n,
            mode,
            route,
            outcome: String::new(),
            scramble_tries: 0,
            scramble_score: 0,
            restarts: 0,
            conflict_edges: 0,
            prescribed_cells: 0,
            exceptional_cells: 0,
            q: 0,
            fix_calls: 0,
            failed_fix_calls: 0,
            disturbed_cells: 0,
            relaxations: Vec::new(),
        }
    }

    fn relax(&mut self, name: &str) {
        if !self.relaxations.iter().any(|r| r == name) {
            self.relaxations.push(name.to_string());
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolveOutcome {
    pub result: SolveResult,
    pub stats: SolveStats,
    pub timings: Timings,
    /// Replayable record of the final attempt.
    pub trade_log: Vec<TradeLogLine>,
}

/// Checks orders, the PLS property and that P avoids A.
pub fn check_inputs(p: &PartialLatinSquare, a: &AvoidanceArray) -> Result<()> {
    if p.order() != a.order() {
        return Err(Error::OrderMismatch { expected: p.order(), found: a.order() });
    }
    let report = validate_pls(p);
    if !report.is_valid() {
        return Err(Error::NotPartialLatin(report.to_string()));
    }
    if let Some(cell) = a.clashes_with(p) {
        return Err(Error::InputClash(cell));
    }
    Ok(())
}

/// The starting square the construction uses for order `n`.
pub fn starting_square(n: usize) -> Result<StartingSquare> {
    if n.is_multiple_of(2) {
        build_even(n)
    } else {
        build_odd_uncertified(n)
    }
}

/// Completes `p` to a Latin square avoiding `a`, seeded by `params.rng_seed`.
pub fn solve(p: &PartialLatinSquare, a: &AvoidanceArray, params: &Params) -> Result<SolveOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(params.rng_seed);
    solve_with_rng(p, a, params, &mut rng)
}

pub fn solve_with_rng(
    p: &PartialLatinSquare,
    a: &AvoidanceArray,
    params: &Params,
    rng: &mut ChaCha8Rng,
) -> Result<SolveOutcome> {
    check_inputs(p, a)?;
    params.validate()?;
    let n = p.order();
    let t0 = Instant::now();
    let mode = if preflight(params, n).all_hold() { Mode::Guaranteed } else { Mode::BestEffort };
    let mut out = if let (true, Ok(l)) = (p.is_complete(), p.to_latin()) {
        let mut stats = SolveStats::new(n, mode, Route::Construction);
        stats.prescribed_cells = n * n;
        stats.outcome = "solved".into();
        SolveOutcome { result: SolveResult::Solved(l), stats, timings: Timings::default(), trade_log: Vec::new() }
    } else if n <= params.oracle_threshold {
        solve_by_oracle(p, a, params, mode)?
    } else {
        let mut out = construct(p, a, params, mode, rng)?;
        if matches!(out.result, SolveResult::GaveUp(_))
            && params.fallback_policy != FallbackPolicy::Strict
            && n <= ORACLE_FALLBACK_MAX_N
        {
            oracle_fallback(&mut out, p, a, params);
        }
        out
    };
    out.timings.total_ms = ms(t0);
    if let SolveResult::Solved(l) = &out.result {
        let report = verify_square(l, p, a);
        if !report.is_clean() {
            out.stats.outcome = "gave-up".into();
            out.result = SolveResult::GaveUp(format!("internal verification failed: {report}"));
        }
    }
    Ok(out)
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1000.0
}

fn solve_by_oracle(p: &PartialLatinSquare, a: &AvoidanceArray, params: &Params, mode: Mode) -> Result<SolveOutcome> {
    let n = p.order();
    let mut stats = SolveStats::new(n, mode, Route::Oracle);
    stats.prescribed_cells = p.filled_count();
    let limits = SearchLimits { max_nodes: params.oracle_max_nodes, ..SearchLimits::default() };
    let result = match solve_exact(p, a, limits) {
        Ok(ExactOutcome::Solved(l)) => SolveResult::Solved(l),
        Ok(ExactOutcome::Infeasible) => SolveResult::Infeasible,
        Err(Error::LimitHit { nodes }) => SolveResult::GaveUp(format!("exact search hit {nodes} nodes")),
        Err(e) => return Err(e),
    };
    stats.outcome = outcome_name(&result).into();
    Ok(SolveOutcome { result, stats, timings: Timings::default(), trade_log: vec![TradeLogLine::Exact { n }] })
}

/// Orders up to this value get a bounded exact search when the construction gives up.
pub const ORACLE_FALLBACK_MAX_N: usize = 32;
const ORACLE_FALLBACK_NODES: u64 = 2_000_000;

fn oracle_fallback(out: &mut SolveOutcome, p: &PartialLatinSquare, a: &AvoidanceArray, params: &Params) {
    let limits = SearchLimits { max_nodes: params.oracle_max_nodes.min(ORACLE_FALLBACK_NODES), ..SearchLimits::default() };
    let result = match solve_exact(p, a, limits) {
        Ok(ExactOutcome::Solved(l)) => SolveResult::Solved(l),
        Ok(ExactOutcome::Infeasible) => SolveResult::Infeasible,
        Err(_) => return,
    };
    out.stats.relax("oracle-fallback");
    out.stats.route = Route::Oracle;
    out.stats.outcome = outcome_name(&result).into();
    out.result = result;
    out.trade_log = vec![TradeLogLine::Exact { n: p.order() }];
}

fn outcome_name(r: &SolveResult) -> &'static str {
    match r {
        SolveResult::Solved(_) => "solved",
        SolveResult::Infeasible => "infeasible",
        SolveResult::GaveUp(_) => "gave-up",
    }
}

/// Maximum passes over the unfixed prescribed cells per attempt.
const FIX_ROUNDS: usize = 6;

fn construct(
    p: &PartialLatinSquare,
    a: &AvoidanceArray,
    params: &Params,
    mode: Mode,
    rng: &mut ChaCha8Rng,
) -> Result<SolveOutcome> {
    let n = p.order();
    let strict = params.fallback_policy == FallbackPolicy::Strict;
    let mut stats = SolveStats::new(n, mode, Route::Construction);
    stats.prescribed_cells = p.filled_count();
    let mut timings = Timings::default();

    let t = Instant::now();
    let l0 = starting_square(n)?;
    timings.start_ms = ms(t);
    stats.exceptional_cells = l0.exceptional_cells.len();
    let gave_up = |mut stats: SolveStats, timings: Timings, why: String| {
        stats.outcome = "gave-up".into();
        SolveOutcome { result: SolveResult::GaveUp(why), stats, timings, trade_log: Vec::new() }
    };
    if !l0.certified {
        if strict {
            return Ok(gave_up(stats, timings, "starting square exceeds the exceptional budget".into()));
        }
        stats.relax("uncertified-start");
    }
    let max_level = match params.fallback_policy {
        FallbackPolicy::Relaxed => Level::NoDisturbance,
        _ => Level::Strict,
    };
    let fix_budget = if mode == Mode::Guaranteed {
        n * (params.alpha.floor_times(n) + params.c(n))
    } else {
        usize::MAX
    };

    let mut last_reason = String::new();
    for attempt in 0..=params.max_restarts {
        stats.restarts = attempt;
        let t = Instant::now();
        let sample = sample_scramble_best(&l0, a, p, params, rng);
        timings.scramble_ms += ms(t);
        stats.scramble_tries += sample.tries;
        stats.scramble_score = sample.report.score;
        if !sample.report.pass {
            if strict {
                last_reason = format!("no well-behaved scramble in {} tries", sample.tries);
                continue;
            }
            stats.relax("scramble-not-well-behaved");
        }

        let t = Instant::now();
        let graph = build_conflict_graph(&l0.square, &sample.a_prime, &sample.p_prime);
        let lists = build_lists(&graph, &sample.a_prime, &sample.p_prime);
        stats.conflict_edges = graph.edges.len();
        let colors = match list_edge_color_bounded(&graph, &lists, params.f(n), rng) {
            Ok(c) => c,
            Err(e) => {
                timings.coloring_ms += ms(t);
                last_reason = e.to_string();
                continue;
            }
        };
        let p_hat = build_r_and_merge(&graph, &colors, &sample.p_prime)?;
        timings.coloring_ms += ms(t);

        let t = Instant::now();
        let disturbed = l0.exceptional_cells.iter().copied().chain(sample.report.condition_a_cells.iter().copied());
        let mut st = SolverState::new(l0.square.clone(), disturbed, p_hat, sample.a_prime.clone(), params.clone());
        let mut log = vec![TradeLogLine::Start {
            n,
            odd_start: n % 2 == 1,
            sigma: sample.scramble.sigma.iter().map(|x| x + 1).collect(),
            tau: sample.scramble.tau.iter().map(|x| x + 1).collect(),
        }];
        let (fix_calls, failed) = (stats.fix_calls, stats.failed_fix_calls);
        let res = fix_loop(&mut st, max_level, fix_budget, &mut stats, &mut log, rng);
        timings.trades_ms += ms(t);
        stats.q = st.q;
        stats.disturbed_cells = st.disturbed_count();
        match res {
            Ok(()) => {
                let solution = unscramble(&st.square, &sample.scramble);
                stats.outcome = "solved".into();
                return Ok(SolveOutcome { result: SolveResult::Solved(solution), stats, timings, trade_log: log });
            }
            Err(reason) => {
                debug_assert!(stats.fix_calls >= fix_calls && stats.failed_fix_calls >= failed);
                last_reason = reason;
            }
        }
    }
    Ok(gave_up(stats, timings, last_reason))
}

fn fix_loop(
    st: &mut SolverState,
    max_level: Level,
    budget: usize,
    stats: &mut SolveStats,
    log: &mut Vec<TradeLogLine>,
    rng: &mut ChaCha8Rng,
) -> std::result::Result<(), String> {
    let mut calls = 0usize;
    // Cheap 4-cell fixes first, while the starting square's intercalates are intact.
    for cell in st.unfixed_prescribed() {
        if calls >= budget {
            return Err(format!("fix-call budget {budget} exhausted"));
        }
        if let Some(out) = direct_fix(st, cell, max_level) {
            calls += 1;
            stats.fix_calls += 1;
            apply_fix(st, cell, &out, stats, log)?;
        }
    }
    for _ in 0..FIX_ROUNDS {
        let pending = st.unfixed_prescribed();
        if pending.is_empty() {
            return Ok(());
        }
        let mut progress = false;
        for cell in pending {
            if st.is_fixed(cell) {
                continue;
            }
            if calls >= budget {
                return Err(format!("fix-call budget {budget} exhausted"));
            }
            calls += 1;
            stats.fix_calls += 1;
            match fix_cell(st, cell, max_level, rng) {
                Ok(out) => {
                    apply_fix(st, cell, &out, stats, log)?;
                    progress = true;
                }
                Err(Error::FeasibilityUnmet(why)) => return Err(why),
                Err(_) => stats.failed_fix_calls += 1,
            }
        }
        if !progress {
            break;
        }
    }
    let left = st.unfixed_prescribed().len();
    if left == 0 {
        Ok(())
    } else {
        Err(format!("{left} prescribed cells could not be fixed"))
    }
}

fn apply_fix(
    st: &mut SolverState,
    cell: CellRef,
    out: &FixOutcome,
    stats: &mut SolveStats,
    log: &mut Vec<TradeLogLine>,
) -> std::result::Result<(), String> {
    if out.level > Level::Strict {
        stats.relax(out.level.name());
    }
    st.record_trade(&out.trade).map_err(|e| e.to_string())?;
    log.push(TradeLogLine::Trade { step: st.q, target: Some([cell.row + 1, cell.col + 1]), cells: out.trade.to_record() });
    Ok(())
}

/// Rebuilds a solution from a trade log.
pub fn replay(log: &[TradeLogLine]) -> Result<Option<LatinSquare>> {
    let Some(TradeLogLine::Start { n, odd_start, sigma, tau }) = log.first() else {
        return match log.first() {
            Some(TradeLogLine::Exact { .. }) => Ok(None),
            _ => Err(Error::Parse("trade log must begin with a start line".into())),
        };
    };
    if *odd_start != (n % 2 == 1) {
        return Err(Error::Parse("start line parity does not match n".into()));
    }
    let mut l = starting_square(*n)?.square;
    for line in &log[1..] {
        match line {
            TradeLogLine::Trade { cells, .. } => l.apply_trade_in_place(&TradeLogLine::decode_trade(cells)?)?,
            _ => return Err(Error::Parse("unexpected line after start".into())),
        }
    }
    let to0 = |v: &[usize]| v.iter().map(|&x| x.wrapping_sub(1)).collect::<Vec<_>>();
    let s = crate::scramble::Scramble::from_perms(to0(sigma), to0(tau))?;
    if s.order() != *n {
        return Err(Error::OrderMismatch { expected: *n, found: s.order() });
    }
    Ok(Some(unscramble(&l, &s)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_two_avoiding_one_cell() {
        let mut a = AvoidanceArray::empty(2);
        a.insert(0, 0, 0);
        let out = solve(&PartialLatinSquare::empty(2), &a, &Params::desk()).unwrap();
        let want = LatinSquare::from_rows(&[vec![1, 0], vec![0, 1]]).unwrap();
        assert_eq!(out.result, SolveResult::Solved(want));
    }

    #[test]
    fn clash_is_input_error() {
        let mut a = AvoidanceArray::empty(3);
        a.insert(0, 0, 0);
        let p = PartialLatinSquare::from_entries(3, &[(0, 0, 0)]).unwrap();
        assert!(matches!(solve(&p, &a, &Params::desk()), Err(Error::InputClash(_))));
    }

    #[test]
    fn full_square_is_returned() {
        let l = build_even(12).unwrap().square;
        let out = solve(&l.to_partial(), &AvoidanceArray::empty(12), &Params::desk()).unwrap();
        assert_eq!(out.result, SolveResult::Solved(l));
    }

    #[test]
    fn replay_matches_solution() {
        use crate::gen::{random_array, random_pls, RandomArrayModel, RandomPlsModel};
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = random_pls(RandomPlsModel { n: 40, p: 0.03 }, &mut rng);
        let a = random_array(RandomArrayModel { n: 40, m: 1 }, &mut rng, Some(&p));
        let out = solve(&p, &a, &Params::desk().with_seed(3)).unwrap();
        if let SolveResult::Solved(l) = &out.result {
            assert_eq!(replay(&out.trade_log).unwrap().as_ref(), Some(l));
        }
    }
}
