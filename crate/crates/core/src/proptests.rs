//! Property tests over the public API.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::gen::{random_array, random_pls, RandomArrayModel, RandomPlsModel};
use crate::intercalate::{all_intercalates, swap_intercalate};
use crate::io;
use crate::oracle::{solve_exact, ExactOutcome, SearchLimits};
use crate::pipeline::{replay, solve, SolveResult};
use crate::scramble::{unscramble, Scramble};
use crate::starting::{build_even, strong_intercalate_census};
use crate::trade::Trade;
use crate::verify::{validate_pls, verify_square};
use crate::{AvoidanceArray, LatinSquare, Params, PartialLatinSquare};

fn instance(n: usize, p: f64, m: usize, seed: u64) -> (PartialLatinSquare, AvoidanceArray) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pls = random_pls(RandomPlsModel { n, p }, &mut rng);
    let a = random_array(RandomArrayModel { n, m }, &mut rng, Some(&pls));
    (pls, a)
}

fn is_latin(l: &LatinSquare) -> bool {
    let n = l.order();
    (0..n).all(|i| {
        let mut row = vec![false; n];
        let mut col = vec![false; n];
        (0..n).all(|j| !std::mem::replace(&mut row[l.get(i, j)], true) && !std::mem::replace(&mut col[l.get(j, i)], true))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn generated_instances_are_compatible(n in 1usize..40, p in 0.0f64..0.6, m in 0usize..4, seed: u64) {
        let (pls, a) = instance(n, p, m, seed);
        prop_assert!(validate_pls(&pls).is_valid());
        prop_assert!(a.clashes_with(&pls).is_none());
        for r in 0..n {
            for c in 0..n {
                prop_assert!(a.cell_len(r, c) <= m.min(n));
            }
        }
    }

    #[test]
    fn files_round_trip(n in 1usize..30, p in 0.0f64..1.0, m in 0usize..5, seed: u64) {
        let (pls, a) = instance(n, p, m, seed);
        let pj = io::pls_to_json(&pls);
        prop_assert_eq!(io::pls_to_json(&io::parse_pls(&pj).unwrap()), pj);
        let aj = io::array_to_json(&a);
        prop_assert_eq!(io::array_to_json(&io::parse_array(&aj).unwrap()), aj);
        prop_assert_eq!(io::parse_pls(&io::pls_to_text(&pls)).unwrap(), pls);
        prop_assert_eq!(io::parse_array(&io::array_to_text(&a)).unwrap(), a);
    }

    #[test]
    fn intercalate_swaps_stay_latin_and_invert(half in 2usize..12, pick: prop::sample::Index) {
        let l = build_even(2 * half).unwrap().square;
        let cs = all_intercalates(&l);
        let c = &cs[pick.index(cs.len())];
        let swapped = swap_intercalate(&l, c).unwrap();
        prop_assert!(is_latin(&swapped));
        let t = Trade::between(&l, &swapped);
        prop_assert_eq!(t.len(), 4);
        prop_assert_eq!(swapped.apply_trade(&t.inverse()).unwrap(), l);
    }

    #[test]
    fn even_census_is_uniform(half in 1usize..30) {
        let n = 2 * half;
        let census = strong_intercalate_census(&build_even(n).unwrap().square);
        prop_assert!(census.iter().flatten().all(|&v| v == half));
    }

    #[test]
    fn unscramble_inverts_pull(n in 1usize..25, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = Scramble::random(n, &mut rng);
        let l = LatinSquare::cyclic(n);
        prop_assert_eq!(unscramble(&s.pull_square(&l), &s), l);
    }

    #[test]
    fn small_solves_agree_with_exact_search(n in 2usize..7, p in 0.0f64..0.4, m in 0usize..3, seed: u64) {
        let (pls, a) = instance(n, p, m, seed);
        let out = solve(&pls, &a, &Params::desk().with_seed(seed)).unwrap();
        let exact = solve_exact(&pls, &a, SearchLimits::default()).unwrap();
        match (&out.result, exact) {
            (SolveResult::Solved(l), ExactOutcome::Solved(_)) => prop_assert!(verify_square(l, &pls, &a).is_clean()),
            (SolveResult::Infeasible, ExactOutcome::Infeasible) => {}
            (r, e) => prop_assert!(false, "pipeline {:?} vs exact {:?}", r, e),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn constructed_solutions_verify_and_replay(n in 30usize..46, seed: u64) {
        let (pls, a) = instance(n, 0.02, 1, seed);
        let out = solve(&pls, &a, &Params::desk().with_seed(seed)).unwrap();
        if let SolveResult::Solved(l) = &out.result {
            prop_assert!(verify_square(l, &pls, &a).is_clean());
            if let Some(replayed) = replay(&out.trade_log).unwrap() {
                prop_assert_eq!(&replayed, l);
            }
            let log = io::trade_log_to_jsonl(&out.trade_log);
            prop_assert_eq!(io::parse_trade_log(&log).unwrap(), out.trade_log.clone());
        }
    }

    #[test]
    fn solving_is_deterministic(n in 20usize..40, seed: u64) {
        let (pls, a) = instance(n, 0.03, 1, seed);
        let params = Params::desk().with_seed(seed);
        let x = solve(&pls, &a, &params).unwrap();
        let y = solve(&pls, &a, &params).unwrap();
        prop_assert_eq!(x.result, y.result);
        prop_assert_eq!(x.stats, y.stats);
        prop_assert_eq!(x.trade_log, y.trade_log);
    }
}
