use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use idla_core::blocks::{check_validity, cut_paste, pts, ptu, stp, to_parallel, BlockKind};
use idla_core::idla::{run, run_uniform_with_schedule, RunConfig};
use idla_core::{generate, Graph, GraphSpec};

fn host() -> impl Strategy<Value = Graph> {
    prop_oneof![
        (3usize..10).prop_map(|n| GraphSpec::Cycle { n }),
        (2usize..8).prop_map(|n| GraphSpec::Complete { n }),
        prop::sample::select(vec![3usize, 7, 15]).prop_map(|n| GraphSpec::BinaryTree { n }),
        (3usize..8).prop_map(|n| GraphSpec::Star { n }),
        (2usize..8).prop_map(|n| GraphSpec::Path { n }),
    ]
    .prop_map(|spec| generate(&spec).unwrap())
}

fn sorted_endpoints(rows: &[Vec<usize>]) -> Vec<usize> {
    let mut ends: Vec<usize> = rows.iter().map(|r| *r.last().unwrap()).collect();
    ends.sort_unstable();
    ends
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn cut_paste_keeps_paths_endpoints_and_length(g in host(), seed in any::<u64>(), pick in any::<(u32, u32)>()) {
        let block = run(&g, 0, &RunConfig::sequential(), seed).unwrap().block;
        let i = pick.0 as usize % block.rows();
        let t = pick.1 as usize % block.rows[i].len();
        let out = cut_paste(&block, i, t).unwrap();
        prop_assert_eq!(out.stats().total_length, block.stats().total_length);
        prop_assert_eq!(sorted_endpoints(&out.rows), sorted_endpoints(&block.rows));
        prop_assert!(check_validity(&out, &g, BlockKind::Any).path_valid);
    }

    #[test]
    fn sequential_parallel_round_trip(g in host(), seed in any::<u64>()) {
        let seq = run(&g, 0, &RunConfig::sequential(), seed).unwrap().block;
        let par = stp(&seq).unwrap();
        prop_assert!(check_validity(&par, &g, BlockKind::Parallel).is_valid());
        prop_assert!(par.stats().max_row_length >= seq.stats().max_row_length);
        prop_assert_eq!(par.stats().total_length, seq.stats().total_length);
        prop_assert_eq!(pts(&par, None).unwrap(), seq);
    }

    #[test]
    fn parallel_sequential_round_trip(g in host(), seed in any::<u64>()) {
        let par = run(&g, 0, &RunConfig::parallel(), seed).unwrap().block;
        let seq = pts(&par, None).unwrap();
        prop_assert!(check_validity(&seq, &g, BlockKind::Sequential).is_valid());
        prop_assert_eq!(stp(&seq).unwrap(), par);
    }

    #[test]
    fn uniform_parallel_round_trip(g in host(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let order: Vec<usize> = (0..200_000).map(|_| rng.random_range(1..g.n())).collect();
        let (block, timing, _) = run_uniform_with_schedule(&g, 0, &RunConfig::uniform(), seed, &order).unwrap();
        prop_assert!(timing.is_consistent_with(&block));
        let par = to_parallel(&block).unwrap();
        prop_assert!(check_validity(&par, &g, BlockKind::Parallel).is_valid());
        let (back, times) = ptu(&par, &order).unwrap();
        prop_assert_eq!(back, block);
        prop_assert_eq!(times, timing);
    }
}
