//! Kernel line labeling against the sequential port-graph oracle.

use busmesh::bus::{word_width, BusSymbol};
use busmesh::kernel::{choose_segment_lengths, sim_bus_t, sim_bus_v, Host};
use busmesh::mmpb::{BusModel, MmpbConfig, Shape};
use busmesh::pc_graph::{resolve_broadcast, LinePcGraph};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_line(n: usize, p_closed: f64, p_write: f64, rng: &mut ChaCha8Rng) -> LinePcGraph {
    let w = word_width(n);
    let sw = (0..n).map(|_| rng.gen_bool(p_closed)).collect();
    let mut init = vec![None; 2 * n];
    for j in 0..n {
        if rng.gen_bool(p_write) {
            let port = 2 * j + rng.gen_range(0..2);
            // Small payload range makes equal-value writers common.
            let max = if rng.gen_bool(0.5) { 4 } else { 1 << w };
            init[port] = Some(rng.gen_range(0..max));
        }
    }
    LinePcGraph::new(w, sw, init).unwrap()
}

/// Every chained length list of powers of two on a line of `n`, up to `levels` levels.
fn length_lists(n: usize, levels: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut stack = vec![Vec::new()];
    while let Some(cur) = stack.pop() {
        if !cur.is_empty() {
            out.push(cur.clone());
        }
        if cur.len() == levels {
            continue;
        }
        let cap = cur.last().copied().unwrap_or(n);
        let mut l = 1;
        while l <= cap {
            let mut next = cur.clone();
            next.push(l);
            stack.push(next);
            l *= 2;
        }
    }
    out
}

#[test]
fn every_length_list_on_small_lines() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for n in [8usize, 16, 32] {
        for lengths in length_lists(n, 3) {
            for model in [BusModel::Word, BusModel::Bit] {
                let mut rounds = None;
                for trial in 0..12 {
                    let p = [0.5, 0.8, 0.95, 1.0][trial % 4];
                    let g = random_line(n, p, [0.1, 0.4][trial % 2], &mut rng);
                    let k = lengths.len();
                    let (got, report) = sim_bus_t(&lengths, k, &g, model).unwrap();
                    assert_eq!(got, resolve_broadcast(&g), "n={n} lengths={lengths:?} {model:?}");
                    assert_eq!(*rounds.get_or_insert(report.rounds), report.rounds, "oblivious");
                }
            }
        }
    }
}

#[test]
fn full_bus_examples() {
    let n = 16;
    let mut init = vec![None; 2 * n];
    init[9] = Some(5);
    let g = LinePcGraph::new(4, vec![true; n], init).unwrap();
    let (out, _) = sim_bus_v(&g, BusModel::Word).unwrap();
    assert!(out.iter().all(|s| *s == BusSymbol::Data(5)));

    let g = LinePcGraph::silent(4, vec![false; n]);
    let (out, _) = sim_bus_v(&g, BusModel::Word).unwrap();
    assert!(out.iter().all(|s| *s == BusSymbol::Phi));

    let mut rng = ChaCha8Rng::seed_from_u64(64);
    for _ in 0..50 {
        let g = random_line(64, 0.8, 0.2, &mut rng);
        assert_eq!(sim_bus_v(&g, BusModel::Word).unwrap().0, resolve_broadcast(&g));
    }
}

#[test]
fn all_rows_in_lockstep() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n in [8usize, 16] {
        for levels in 1..=n.trailing_zeros() as usize {
            let lengths = choose_segment_lengths(n, levels).unwrap();
            let cfg = MmpbConfig::new(n, lengths).unwrap();
            let mut host = Host::new(cfg, Shape::Full, BusModel::Word).unwrap();
            let lines: Vec<_> = (0..n).map(|_| random_line(n, 0.85, 0.3, &mut rng)).collect();
            let (out, _) = host.simulate_rows(&lines).unwrap();
            for (g, got) in lines.iter().zip(out) {
                assert_eq!(got, resolve_broadcast(g));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn scheduled_lengths_match_oracle(e in 3u32..8, seed: u64, pc in 0.0f64..=1.0, pw in 0.0f64..=1.0) {
        let n = 1usize << e;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_line(n, pc, pw, &mut rng);
        for levels in 1..=e as usize {
            let lengths = choose_segment_lengths(n, levels).unwrap();
            let (got, _) = sim_bus_t(&lengths, levels, &g, BusModel::Word).unwrap();
            prop_assert_eq!(got, resolve_broadcast(&g));
        }
    }
}
