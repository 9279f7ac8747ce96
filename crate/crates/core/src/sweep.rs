//! Parameter sweeps over the random models and the blocked constructions.
//!
//! Every instance gets its own seed derived from the base seed, the grid
//! point index and the replicate index, so results do not depend on thread
//! scheduling.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::array::AvoidanceArray;
use crate::gen::{infeasible_pair, random_array, random_pls, CBlock, FrontierPoint, RandomArrayModel, RandomPlsModel};
use crate::oracle::{solve_exact, ExactOutcome, SearchLimits};
use crate::params::Params;
use crate::pipeline::{solve, SolveResult};
use crate::square::PartialLatinSquare;

/// Stable CSV header of [`SweepRow::to_csv`].
pub const CSV_HEADER: &str =
    "kind,n,p,m,r,t,alpha,beta,instances,successes,success_rate,infeasible,gave_up,oracle_checked,oracle_agree_rate,mean_q,mean_time_ms";

/// Orders up to this value are cross-checked against exhaustive search.
pub const ORACLE_CHECK_MAX_N: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GridPoint {
    Random { n: usize, p: f64, m: usize },
    Frontier(FrontierPoint),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub point: GridPoint,
    pub instances: usize,
    pub successes: usize,
    pub infeasible: usize,
    pub gave_up: usize,
    pub oracle_checked: usize,
    pub oracle_agree: usize,
    pub mean_q: f64,
    pub mean_time_ms: f64,
}

impl SweepRow {
    pub fn success_rate(&self) -> f64 {
        ratio(self.successes, self.instances)
    }

    pub fn to_csv(&self) -> String {
        let (kind, n, p, m, r, t, ab) = match self.point {
            GridPoint::Random { n, p, m } => ("random", n, format!("{p}"), m.to_string(), String::new(), String::new(), None),
            GridPoint::Frontier(fp) => {
                ("frontier", fp.order(), String::new(), String::new(), fp.r.to_string(), fp.t.to_string(), Some(fp.alpha_beta()))
            }
        };
        let (alpha, beta) = ab.map_or((String::new(), String::new()), |(a, b)| (format!("{a:.6}"), format!("{b:.6}")));
        let agree = if self.oracle_checked == 0 {
            String::new()
        } else {
            format!("{:.4}", ratio(self.oracle_agree, self.oracle_checked))
        };
        format!(
            "{kind},{n},{p},{m},{r},{t},{alpha},{beta},{},{},{:.4},{},{},{},{agree},{:.3},{:.3}",
            self.instances,
            self.successes,
            self.success_rate(),
            self.infeasible,
            self.gave_up,
            self.oracle_checked,
            self.mean_q,
            self.mean_time_ms
        )
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Seed of replicate `rep` at grid point `point`.
pub fn instance_seed(base: u64, point: usize, rep: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(base);
    rng.set_stream(((point as u64) << 32) | rep as u64);
    rng.next_u64()
}

/// The instance of replicate `seed` at `point`: P, then A cleaned of P's entries.
pub fn instance(point: GridPoint, seed: u64) -> (PartialLatinSquare, AvoidanceArray) {
    match point {
        GridPoint::Random { n, p, m } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pls = random_pls(RandomPlsModel { n, p }, &mut rng);
            let a = random_array(RandomArrayModel { n, m }, &mut rng, Some(&pls));
            (pls, a)
        }
        GridPoint::Frontier(fp) => infeasible_pair(fp, CBlock::Corrected),
    }
}

#[derive(Clone, Debug, Default)]
struct Run {
    solved: bool,
    infeasible: bool,
    gave_up: bool,
    oracle: Option<bool>,
    q: usize,
    ms: f64,
}

fn run_one(point: GridPoint, seed: u64, params: &Params) -> Run {
    let (p, a) = instance(point, seed);
    let n = p.order();
    let mut run = Run::default();
    match solve(&p, &a, &params.clone().with_seed(seed)) {
        Ok(out) => {
            run.q = out.stats.q;
            run.ms = out.timings.total_ms;
            match out.result {
                SolveResult::Solved(_) => run.solved = true,
                SolveResult::Infeasible => run.infeasible = true,
                SolveResult::GaveUp(_) => run.gave_up = true,
            }
        }
        Err(_) => run.gave_up = true,
    }
    if n <= ORACLE_CHECK_MAX_N {
        let limits = SearchLimits { max_nodes: params.oracle_max_nodes, ..SearchLimits::default() };
        run.oracle = match solve_exact(&p, &a, limits) {
            Ok(ExactOutcome::Solved(_)) => Some(!run.infeasible),
            Ok(ExactOutcome::Infeasible) => Some(!run.solved),
            Err(_) => None,
        };
    }
    run
}

/// Runs `replicates` instances at every point, in parallel.
pub fn run_sweep(points: &[GridPoint], replicates: usize, base_seed: u64, params: &Params) -> Vec<SweepRow> {
    let jobs: Vec<(usize, usize)> = (0..points.len()).flat_map(|i| (0..replicates).map(move |r| (i, r))).collect();
    let runs: Vec<(usize, Run)> = jobs
        .par_iter()
        .map(|&(i, rep)| (i, run_one(points[i], instance_seed(base_seed, i, rep), params)))
        .collect();
    points
        .iter()
        .enumerate()
        .map(|(i, &point)| {
            let mine: Vec<&Run> = runs.iter().filter(|(j, _)| *j == i).map(|(_, r)| r).collect();
            let count = |f: fn(&Run) -> bool| mine.iter().filter(|r| f(r)).count();
            let instances = mine.len();
            SweepRow {
                point,
                instances,
                successes: count(|r| r.solved),
                infeasible: count(|r| r.infeasible),
                gave_up: count(|r| r.gave_up),
                oracle_checked: count(|r| r.oracle.is_some()),
                oracle_agree: count(|r| r.oracle == Some(true)),
                mean_q: mine.iter().map(|r| r.q as f64).sum::<f64>() / instances.max(1) as f64,
                mean_time_ms: mine.iter().map(|r| r.ms).sum::<f64>() / instances.max(1) as f64,
            }
        })
        .collect()
}

/// Header plus one line per row.
pub fn to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.to_csv());
        out.push('\n');
    }
    out
}
