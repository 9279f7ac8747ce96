//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Everything runs inside one test so the lines come out in order. They are
//! written to the raw stdout handle, which the test harness does not capture.

use std::collections::BTreeSet;
use std::io::Write;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use avoidsq_core::coloring::{
    build_conflict_graph, build_lists, build_r_and_merge, list_edge_color_bounded, ConflictGraph, ListAssignment,
};
use avoidsq_core::gen::{infeasible_pair, CBlock, FrontierPoint};
use avoidsq_core::io::latin_to_json;
use avoidsq_core::oracle::{solve_exact, ExactOutcome, SearchLimits};
use avoidsq_core::pipeline::{preflight, solve, starting_square, SolveResult};
use avoidsq_core::scramble::sample_scramble_best;
use avoidsq_core::starting::{build_even, build_odd_uncertified, strong_intercalate_census};
use avoidsq_core::sweep::{instance, instance_seed, GridPoint};
use avoidsq_core::trades::{column_exchange, fix_cell, row_exchange, ExchangeRequest, Level, LinePair, SolverState};
use avoidsq_core::verify::verify_square;
use avoidsq_core::{AvoidanceArray, CellRef, LatinSquare, Params, Trade};

struct Line {
    id: &'static str,
    pass: bool,
    detail: String,
}

fn report(lines: &mut Vec<Line>, id: &'static str, pass: bool, detail: String) {
    let mut out = std::io::stdout().lock();
    writeln!(out, "{} criterion {id}: {detail}", if pass { "PASS" } else { "FAIL" }).unwrap();
    out.flush().unwrap();
    lines.push(Line { id, pass, detail });
}

fn secs(d: Duration) -> String {
    format!("{:.1}s", d.as_secs_f64())
}

/// Strong intercalates through every cell, by direct enumeration of row and column pairs.
fn brute_census(l: &LatinSquare) -> Vec<Vec<usize>> {
    let n = l.order();
    let half = n / 2;
    let mut count = vec![vec![0; n]; n];
    for r1 in 0..n {
        for r2 in r1 + 1..n {
            for c1 in 0..n {
                for c2 in c1 + 1..n {
                    let (a, b) = (l.get(r1, c1), l.get(r1, c2));
                    if l.get(r2, c1) == b && l.get(r2, c2) == a && ((a < half) != (b < half)) {
                        for (r, c) in [(r1, c1), (r1, c2), (r2, c1), (r2, c2)] {
                            count[r][c] += 1;
                        }
                    }
                }
            }
        }
    }
    count
}

fn criterion_1(lines: &mut Vec<Line>) {
    let t = Instant::now();
    let mut bad = Vec::new();
    for n in [4, 8, 20, 50, 200, 500] {
        let l = build_even(n).unwrap().square;
        let census = strong_intercalate_census(&l);
        if census.iter().flatten().any(|&v| v != n / 2) {
            bad.push(n);
        }
        if n <= 20 && brute_census(&l) != census {
            bad.push(n);
        }
    }
    let el = t.elapsed();
    let pass = bad.is_empty() && el < Duration::from_secs(10);
    report(lines, "1", pass, format!("every cell in exactly n/2 strong intercalates, bad orders {bad:?}, {}", secs(el)));
}

fn criterion_2(lines: &mut Vec<Line>) {
    let t = Instant::now();
    let mut parts = Vec::new();
    let mut ok = true;
    for n in [9, 21, 51, 201] {
        let l = build_odd_uncertified(n).unwrap().square;
        let below = strong_intercalate_census(&l).iter().flatten().filter(|&&v| v < n / 2).count();
        ok &= below <= 3 * n + 7;
        parts.push(format!("n={n}: {below}/{}", 3 * n + 7));
    }
    let el = t.elapsed();
    let pass = ok && el < Duration::from_secs(10);
    report(lines, "2", pass, format!("cells below floor(n/2) vs 3n+7 budget [{}], {}", parts.join(", "), secs(el)));
}

/// Instance fingerprints: solution bytes (or outcome) plus stats JSON.
type Prints = Vec<String>;

fn fingerprint(result: &SolveResult, stats: &avoidsq_core::pipeline::SolveStats) -> String {
    let head = match result {
        SolveResult::Solved(l) => latin_to_json(l),
        SolveResult::Infeasible => "infeasible\n".into(),
        SolveResult::GaveUp(why) => format!("gave-up: {why}\n"),
    };
    head + &serde_json::to_string(stats).unwrap()
}

fn criterion_3() -> (bool, String, Prints) {
    let t = Instant::now();
    let mut params = Params::desk();
    params.oracle_threshold = 0;
    let mut points = Vec::new();
    for n in [4, 5, 6] {
        for p in [0.1, 0.3] {
            for m in [0, 1, 2] {
                points.push(GridPoint::Random { n, p, m });
            }
        }
    }
    let (mut total, mut agree, mut unverified, mut solved) = (0, 0, 0, 0);
    let mut prints = Vec::new();
    for rep in 0..28 {
        for (i, &point) in points.iter().enumerate() {
            let seed = instance_seed(3, i, rep);
            let (p, a) = instance(point, seed);
            let out = solve(&p, &a, &params.clone().with_seed(seed)).unwrap();
            let exact = solve_exact(&p, &a, SearchLimits::default()).unwrap();
            total += 1;
            let returned = matches!(out.result, SolveResult::Solved(_));
            if returned == matches!(exact, ExactOutcome::Solved(_)) {
                agree += 1;
            }
            if let SolveResult::Solved(l) = &out.result {
                solved += 1;
                if !verify_square(l, &p, &a).is_clean() {
                    unverified += 1;
                }
            }
            prints.push(fingerprint(&out.result, &out.stats));
        }
    }
    let el = t.elapsed();
    let pass = total >= 500 && agree == total && unverified == 0 && el < Duration::from_secs(60);
    let detail = format!(
        "pipeline vs exact search agree {agree}/{total}, {solved} squares returned, {unverified} unverified, {}",
        secs(el)
    );
    (pass, detail, prints)
}

fn criterion_4(lines: &mut Vec<Line>) {
    let t = Instant::now();
    let (mut total, mut certified) = (0, 0);
    for r in [1, 2] {
        for tt in 1..=r + 1 {
            let (p, a) = infeasible_pair(FrontierPoint::new(r, tt).unwrap(), CBlock::Corrected);
            total += 1;
            if solve_exact(&p, &a, SearchLimits { max_nodes: u64::MAX, ..SearchLimits::default() }) == Ok(ExactOutcome::Infeasible) {
                certified += 1;
            }
        }
    }
    let el = t.elapsed();
    let pass = certified == total && el < Duration::from_secs(300);
    report(lines, "4", pass, format!("exact search certifies {certified}/{total} blocked pairs infeasible, {}", secs(el)));
}

/// Applies `trade` to a plain grid and checks every row and column is a permutation.
fn latin_after(l: &LatinSquare, trade: &Trade) -> bool {
    let n = l.order();
    let mut grid = l.rows();
    for e in trade.entries() {
        if grid[e.cell.row][e.cell.col] != e.old {
            return false;
        }
        grid[e.cell.row][e.cell.col] = e.new;
    }
    (0..n).all(|i| {
        let row: BTreeSet<usize> = grid[i].iter().copied().collect();
        let col: BTreeSet<usize> = (0..n).map(|r| grid[r][i]).collect();
        row.len() == n && col.len() == n
    })
}

/// Every changed cell that is a conflict afterwards was one before.
fn conflicts_monotone(a: &AvoidanceArray, trade: &Trade) -> bool {
    trade.entries().iter().all(|e| !a.contains_at(e.cell, e.new) || a.contains_at(e.cell, e.old))
}

fn exchange_violations(st: &SolverState, trade: &Trade, line: (bool, usize, usize, usize)) -> Vec<String> {
    let (row, a1, b1, b2) = line;
    let cell = |b: usize| if row { CellRef::new(a1, b) } else { CellRef::new(b, a1) };
    let mut v = Vec::new();
    if trade.len() > 16 {
        v.push(format!("size {}", trade.len()));
    }
    if !latin_after(&st.square, trade) {
        v.push("not Latin".into());
    }
    if !conflicts_monotone(&st.forbidden, trade) {
        v.push("new conflict".into());
    }
    if trade.cells().any(|c| st.target.at(c).is_some()) {
        v.push("touches a prescribed cell".into());
    }
    let new_at = |c: CellRef| trade.entries().iter().find(|e| e.cell == c).map(|e| e.new);
    if new_at(cell(b1)) != Some(st.square.at(cell(b2))) || new_at(cell(b2)) != Some(st.square.at(cell(b1))) {
        v.push("the two cells are not exchanged".into());
    }
    v
}

fn fix_violations(st: &SolverState, target: CellRef, trade: &Trade) -> Vec<String> {
    let mut v = Vec::new();
    if trade.len() > 69 {
        v.push(format!("size {}", trade.len()));
    }
    if !latin_after(&st.square, trade) {
        v.push("not Latin".into());
    }
    if !conflicts_monotone(&st.forbidden, trade) {
        v.push("new conflict".into());
    }
    let want = st.target.at(target);
    if trade.entries().iter().find(|e| e.cell == target).map(|e| e.new) != want {
        v.push("target not fixed".into());
    }
    let others: Vec<_> =
        trade.entries().iter().filter(|e| e.cell != target && st.target.at(e.cell).is_some()).collect();
    if others.len() > 2 {
        v.push(format!("{} other prescribed cells changed", others.len()));
    }
    if others.iter().any(|e| st.target.at(e.cell) == Some(e.old)) {
        v.push("a fixed cell was changed".into());
    }
    v
}

/// The state the pipeline reaches right before its fix loop, for the first attempt.
fn prepared_state(n: usize, seed: u64) -> Option<SolverState> {
    let params = Params::desk().with_seed(seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (p, a) = instance(GridPoint::Random { n, p: 0.03, m: 2 }, seed);
    let l0 = starting_square(n).ok()?;
    let sample = sample_scramble_best(&l0, &a, &p, &params, &mut rng);
    let graph = build_conflict_graph(&l0.square, &sample.a_prime, &sample.p_prime);
    let lists = build_lists(&graph, &sample.a_prime, &sample.p_prime);
    let colors = list_edge_color_bounded(&graph, &lists, params.f(n), &mut rng).ok()?;
    let p_hat = build_r_and_merge(&graph, &colors, &sample.p_prime).ok()?;
    let disturbed = l0.exceptional_cells.iter().copied().chain(sample.report.condition_a_cells.iter().copied());
    Some(SolverState::new(l0.square.clone(), disturbed, p_hat, sample.a_prime, params))
}

fn criterion_5(lines: &mut Vec<Line>) {
    let t = Instant::now();
    let (mut exchanges, mut fixes, mut violations) = (0usize, 0usize, Vec::new());
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let orders = [40, 50, 60, 70, 80];
    let mut k = 0u64;
    while (exchanges < 1000 || fixes < 200) && k < 40 {
        let n = orders[k as usize % orders.len()];
        k += 1;
        let Some(mut st) = prepared_state(n, instance_seed(5, n, k as usize)) else { continue };
        let mut pending = st.unfixed_prescribed();
        pending.shuffle(&mut rng);
        for (i, cell) in pending.into_iter().enumerate() {
            if i >= 60 {
                break;
            }
            for _ in 0..6 {
                let level = Level::ALL[rng.gen_range(0..3)];
                let avoid: Vec<usize> = (0..rng.gen_range(0..3)).map(|_| rng.gen_range(0..n)).collect();
                let req = ExchangeRequest::new(level).unchecked().avoiding(&avoid);
                let row = rng.gen_bool(0.5);
                let a1 = rng.gen_range(0..n);
                let (b1, b2) = (rng.gen_range(0..n), rng.gen_range(0..n));
                let pair = if b1 != b2 && rng.gen_bool(0.5) { LinePair::Fixed(b1, b2) } else { LinePair::Any };
                let res = if row { row_exchange(&st, a1, pair, &req, &mut rng) } else { column_exchange(&st, a1, pair, &req, &mut rng) };
                let Ok(trade) = res else { continue };
                let (f1, f2) = match pair {
                    LinePair::Fixed(x, y) => (x, y),
                    LinePair::Any => {
                        // The exchanged pair is the two cells of the line that swap symbols.
                        let on_line: Vec<usize> = trade
                            .cells()
                            .filter(|c| if row { c.row == a1 } else { c.col == a1 })
                            .map(|c| if row { c.col } else { c.row })
                            .collect();
                        let swapped = on_line.iter().flat_map(|&x| on_line.iter().map(move |&y| (x, y))).find(|&(x, y)| {
                            let at = |b: usize| if row { CellRef::new(a1, b) } else { CellRef::new(b, a1) };
                            x < y
                                && trade.entries().iter().any(|e| e.cell == at(x) && e.new == st.square.at(at(y)))
                                && trade.entries().iter().any(|e| e.cell == at(y) && e.new == st.square.at(at(x)))
                        });
                        match swapped {
                            Some(p) => p,
                            None => {
                                violations.push("Any exchange swapped no pair".to_string());
                                continue;
                            }
                        }
                    }
                };
                exchanges += 1;
                let mut v = exchange_violations(&st, &trade, (row, a1, f1, f2));
                if trade.entries().iter().any(|e| avoid.contains(&e.old)) {
                    v.push("moved an avoided symbol".into());
                }
                violations.extend(v.into_iter().map(|s| format!("exchange n={n}: {s}")));
            }
            if st.is_fixed(cell) {
                continue;
            }
            let Ok(out) = fix_cell(&st, cell, Level::NoDisturbance, &mut rng) else { continue };
            fixes += 1;
            violations.extend(fix_violations(&st, cell, &out.trade).into_iter().map(|s| format!("fix n={n}: {s}")));
            if st.record_trade(&out.trade).is_err() {
                violations.push(format!("fix n={n}: record_trade rejected the trade"));
            }
        }
    }
    let el = t.elapsed();
    let pass = exchanges >= 1000 && fixes >= 200 && violations.is_empty();
    let first = violations.first().cloned().unwrap_or_default();
    report(
        lines,
        "5",
        pass,
        format!("{exchanges} exchanges, {fixes} fix_cell trades, {} violations {first}, {}", violations.len(), secs(el)),
    );
}

fn criterion_6a() -> (bool, String, Prints) {
    let t = Instant::now();
    let point = GridPoint::Random { n: 60, p: 0.03, m: 2 };
    let (mut solved, mut unverified) = (0, 0);
    let mut prints = Vec::new();
    for rep in 0..100 {
        let seed = instance_seed(6, 0, rep);
        let (p, a) = instance(point, seed);
        let out = solve(&p, &a, &Params::desk().with_seed(seed)).unwrap();
        if let SolveResult::Solved(l) = &out.result {
            solved += 1;
            if !verify_square(l, &p, &a).is_clean() {
                unverified += 1;
            }
        }
        prints.push(fingerprint(&out.result, &out.stats));
    }
    let el = t.elapsed();
    let pass = solved >= 90 && unverified == 0 && el < Duration::from_secs(600);
    (pass, format!("desk n=60 p=0.03 m=2: {solved}/100 solved, {unverified} unverified, {}", secs(el)), prints)
}

fn criterion_6b(lines: &mut Vec<Line>) {
    let t = Instant::now();
    let rep = preflight(&Params::paper(), 1_000_000);
    let el = t.elapsed();
    let failing: Vec<String> = rep.failing().map(|c| format!("{} ({:.4e} {} {:.4e})", c.name, c.lhs, c.relation, c.rhs)).collect();
    let pass = rep.all_hold() && el < Duration::from_secs(1);
    report(lines, "6b", pass, format!("proof constants at n=10^6, failing checks: [{}]", failing.join("; ")));
}

fn criterion_7(lines: &mut Vec<Line>) {
    let t = Instant::now();
    let (n, f, max_deg, list_len) = (100, 3, 5, 20);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut good = 0;
    for _ in 0..200 {
        let (mut rdeg, mut cdeg) = (vec![0; n], vec![0; n]);
        // More than n*f edges cannot be coloured at all, so sizes stay within that.
        let size = rng.gen_range(1..=n * f);
        let mut edges = BTreeSet::new();
        while edges.len() < size {
            let (r, c) = (rng.gen_range(0..n), rng.gen_range(0..n));
            if rdeg[r] < max_deg && cdeg[c] < max_deg && edges.insert(CellRef::new(r, c)) {
                rdeg[r] += 1;
                cdeg[c] += 1;
            }
        }
        let g = ConflictGraph { n, edges: edges.into_iter().collect() };
        let symbols: Vec<usize> = (0..n).collect();
        let lists = ListAssignment {
            lists: g
                .edges
                .iter()
                .map(|_| {
                    let mut l: Vec<usize> = symbols.choose_multiple(&mut rng, list_len).copied().collect();
                    l.sort_unstable();
                    l
                })
                .collect(),
        };
        let Ok(colors) = list_edge_color_bounded(&g, &lists, f, &mut rng) else { continue };
        let in_list = colors.iter().zip(&lists.lists).all(|(c, l)| l.contains(c));
        let proper = (0..g.edges.len()).all(|i| {
            (i + 1..g.edges.len()).all(|j| {
                let (a, b) = (g.edges[i], g.edges[j]);
                !(a.row == b.row || a.col == b.col) || colors[i] != colors[j]
            })
        });
        let mut mult = vec![0; n];
        for &c in &colors {
            mult[c] += 1;
        }
        if colors.len() == g.edges.len() && in_list && proper && mult.iter().all(|&m| m <= f) {
            good += 1;
        }
    }
    let el = t.elapsed();
    let pass = good == 200 && el < Duration::from_secs(30);
    report(lines, "7", pass, format!("{good}/200 colourings proper, in-list and within multiplicity f={f}, {}", secs(el)));
}

fn criterion_8(lines: &mut Vec<Line>) {
    let t = Instant::now();
    let params = Params::desk();
    let points: Vec<GridPoint> = [40, 60, 80].iter().map(|&n| GridPoint::Random { n, p: 0.02, m: n / 50 }).collect();
    let rows = avoidsq_core::sweep::run_sweep(&points, 100, 8, &params);
    let rates: Vec<f64> = rows.iter().map(|r| r.success_rate()).collect();
    let el = t.elapsed();
    let monotone = rates.windows(2).all(|w| w[0] <= w[1]);
    let pass = monotone && rates[2] >= 0.9 && el < Duration::from_secs(1200);
    report(lines, "8", pass, format!("success at n=40,60,80: {rates:?}, {}", secs(el)));
}

#[test]
fn acceptance() {
    // The harness prints "test acceptance ... " without a newline.
    writeln!(std::io::stdout()).unwrap();
    let mut lines = Vec::new();
    criterion_1(&mut lines);
    criterion_2(&mut lines);
    let (pass3, detail3, prints3) = criterion_3();
    report(&mut lines, "3", pass3, detail3);
    criterion_4(&mut lines);
    criterion_5(&mut lines);
    let (pass6, detail6, prints6) = criterion_6a();
    report(&mut lines, "6a", pass6, detail6);
    criterion_6b(&mut lines);
    criterion_7(&mut lines);
    criterion_8(&mut lines);

    let (_, _, again3) = criterion_3();
    let (_, _, again6) = criterion_6a();
    let same3 = prints3 == again3;
    let same6 = prints6 == again6;
    report(
        &mut lines,
        "9",
        same3 && same6,
        format!("rerun identical: criterion 3 {same3} ({} runs), criterion 6 {same6} ({} runs)", prints3.len(), prints6.len()),
    );

    let failed: Vec<String> = lines.iter().filter(|l| !l.pass).map(|l| format!("{} ({})", l.id, l.detail)).collect();
    assert!(failed.is_empty(), "failing criteria: {failed:#?}");
}
