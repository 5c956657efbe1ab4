mod common;

use std::collections::BTreeMap;

use nacc_core::arch::{Factor, GridArch, GridPoint};
use nacc_core::circuit::{parse_qasm, CzCircuit};
use nacc_core::divide::{divide_circuit, verify_division, DivideOptions};
use nacc_core::embed::{choose_embedding, find_embeddings, is_embeddable, is_embedding, Mapping};
use nacc_core::fidelity::{exec_time, idle_time, success_probability, HardwareParams};
use nacc_core::generate::{generate, to_qasm, Family, GenOptions};
use nacc_core::graph::Graph;
use nacc_core::route::{compatible, conflict_graph, extract_moves, replay, route, Coord, Move};
use nacc_core::schedule::{compile, verify_schedule, CompileOptions, Counters, ExecMode};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn arch(b: usize, r_int: Factor, r_restr: Factor) -> GridArch {
    GridArch::new(b, 3.0, r_int, r_restr).unwrap()
}

fn radius() -> impl Strategy<Value = Factor> {
    prop_oneof![Just(Factor::integer(1)), Just(Factor::sqrt(2)), Just(Factor::integer(2))]
}

/// Two random mappings of the same qubits on a `b`-sided grid.
fn mapping_pair() -> impl Strategy<Value = (GridArch, Mapping, Mapping)> {
    (2usize..=6, any::<u64>()).prop_flat_map(|(b, seed)| {
        (1..=b * b).prop_map(move |n| {
            let a = arch(b, Factor::integer(2), Factor::integer(4));
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = common::random_mapping(n, &a, &mut rng);
            let f2 = common::random_mapping(n, &a, &mut rng);
            (a, f, f2)
        })
    })
}

fn circuit(max_n: usize, max_m: usize) -> impl Strategy<Value = CzCircuit> {
    (2..=max_n).prop_flat_map(move |n| {
        prop::collection::vec((0..n, 0..n), 0..=max_m).prop_map(move |pairs| {
            let pairs: Vec<_> = pairs.into_iter().filter(|(a, b)| a != b).collect();
            CzCircuit::new(n, pairs).unwrap()
        })
    })
}

/// Smallest number of independent sets covering the conflict graph.
fn min_batches(moves: &[Move]) -> usize {
    let g = conflict_graph(moves);
    let n = moves.len();
    if n == 0 {
        return 0;
    }
    for k in 1..=n {
        let mut colour = vec![0usize; n];
        loop {
            let proper = g.edges().all(|(a, b)| colour[a] != colour[b]);
            if proper {
                return k;
            }
            let mut i = 0;
            while i < n && colour[i] == k - 1 {
                colour[i] = 0;
                i += 1;
            }
            if i == n {
                break;
            }
            colour[i] += 1;
        }
    }
    n
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn routing_replays_to_the_target((a, f, f2) in mapping_pair()) {
        let plan = route(&f, &f2, &a).unwrap();
        prop_assert_eq!(replay(&plan, &f, &a).unwrap(), f2.clone());
        prop_assert!(plan.batches.len() <= 2 * f.len());
        let moves: usize = plan.batches.iter().map(|b| b.moves.len()).sum();
        prop_assert_eq!(plan.transfers, 2 * moves);
        let recomputed: f64 = plan
            .batches
            .iter()
            .map(|b| b.moves.iter().map(Move::length).fold(0.0, f64::max) * a.spacing_um())
            .sum();
        prop_assert!((recomputed - plan.total_max_distance_um).abs() < 1e-9);
    }

    #[test]
    fn batches_are_maximal_and_order_preserving((a, f, f2) in mapping_pair()) {
        let plan = route(&f, &f2, &a).unwrap();
        let mut pos: Vec<Coord> = f.points().iter().map(|&p| p.into()).collect();
        let target: Vec<Coord> = f2.points().iter().map(|&p| p.into()).collect();
        for batch in &plan.batches {
            let ids: Vec<usize> = batch.moves.iter().map(|m| m.qubit).collect();
            for axis in 0..2 {
                let key = |c: Coord| if axis == 0 { (c.x() * 2.0) as i64 } else { (c.y() * 2.0) as i64 };
                let mut by_src = batch.moves.clone();
                by_src.sort_by_key(|m| (key(m.from), m.qubit));
                let mut by_dst = batch.moves.clone();
                by_dst.sort_by_key(|m| (key(m.to), m.qubit));
                let src: Vec<i64> = by_src.iter().map(|m| key(m.from)).collect();
                let dst_of_src: Vec<i64> = by_src.iter().map(|m| key(m.to)).collect();
                let mut sorted = dst_of_src.clone();
                sorted.sort();
                prop_assert_eq!(&dst_of_src, &sorted, "axis {} order flips for {:?}", axis, src);
            }
            let parking = batch.moves.len() == 1 && batch.moves[0].to != target[batch.moves[0].qubit];
            if !parking {
                // No leftover executable move fits alongside the batch.
                let occupied: BTreeMap<Coord, usize> = pos.iter().enumerate().map(|(q, &c)| (c, q)).collect();
                for q in (0..pos.len()).filter(|q| !ids.contains(q) && pos[*q] != target[*q]) {
                    let m = Move { qubit: q, from: pos[q], to: target[q] };
                    let lands = occupied.get(&m.to).is_none_or(|o| ids.contains(o));
                    let fits = batch.moves.iter().all(|b| compatible(b, &m));
                    prop_assert!(!(lands && fits), "move {} could join the batch", m);
                }
            }
            for m in &batch.moves {
                pos[m.qubit] = m.to;
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn greedy_batching_is_near_optimal_without_blocking(seed in any::<u64>(), k in 1usize..=8) {
        // Sources in the top half, targets in the bottom half: nothing blocks.
        let a = arch(6, Factor::integer(2), Factor::integer(4));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        use rand::seq::SliceRandom;
        let mut top: Vec<GridPoint> = (0..18).map(|i| a.point(i)).collect();
        let mut bottom: Vec<GridPoint> = (18..36).map(|i| a.point(i)).collect();
        top.shuffle(&mut rng);
        bottom.shuffle(&mut rng);
        let f = Mapping::new(top[..k].to_vec(), &a).unwrap();
        let f2 = Mapping::new(bottom[..k].to_vec(), &a).unwrap();
        let plan = route(&f, &f2, &a).unwrap();
        let best = min_batches(&extract_moves(&f, &f2).unwrap());
        prop_assert!(plan.batches.len() <= best + 2, "{} batches vs optimum {}", plan.batches.len(), best);
    }

    #[test]
    fn layering_matches_longest_path(c in circuit(8, 40)) {
        let oracle = common::longest_path_layers(&c);
        for (l, layer) in c.layers().iter().enumerate() {
            for &g in layer {
                prop_assert_eq!(oracle[g], l);
            }
        }
        prop_assert_eq!(c.depth(), common::longest_path_depth(&c));
    }

    #[test]
    fn canonical_and_qasm_round_trip(c in circuit(8, 30)) {
        prop_assert_eq!(CzCircuit::from_canonical(&c.to_canonical()).unwrap(), c.clone());
        prop_assert_eq!(parse_qasm(&to_qasm(&c)).unwrap(), c);
    }

    #[test]
    fn found_embeddings_are_valid_and_deterministic(
        n in 1usize..=9, p in 0.1f64..0.7, seed in any::<u64>(), r in radius(), b in 3usize..=4,
    ) {
        let a = arch(b, r, Factor::integer(4));
        let ig = common::random_graph(n, p, &mut ChaCha8Rng::seed_from_u64(seed));
        let first = find_embeddings(&ig, &a, 200);
        prop_assert!(first.iter().all(|m| is_embedding(m, &ig, &a)));
        prop_assert_eq!(&first, &find_embeddings(&ig, &a, 200));
    }

    #[test]
    fn choose_never_loses_to_a_candidate(seed in any::<u64>(), k in 1usize..20) {
        let a = arch(4, Factor::integer(2), Factor::integer(4));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let prev = common::random_mapping(6, &a, &mut rng);
        let cands: Vec<Mapping> = (0..k).map(|_| common::random_mapping(6, &a, &mut rng)).collect();
        let best = choose_embedding(&cands, Some(&prev)).unwrap();
        let cost = prev.displacement(&best);
        prop_assert!(cands.iter().all(|c| cost <= prev.displacement(c) + 1e-9));
    }

    #[test]
    fn divisions_verify(c in circuit(9, 40), r in radius()) {
        let a = arch(3, r, Factor::integer(4));
        let d = divide_circuit(&c, &a, DivideOptions::default()).unwrap();
        prop_assert!(verify_division(&d, &c, &a).is_empty());
        if c.depth() > 0 && is_embeddable(&c.interaction_graph(0..c.depth()).unwrap(), &a) {
            prop_assert_eq!(d.len(), 1);
        }
    }

    #[test]
    fn compiled_schedules_verify(c in circuit(9, 40), r in radius(), packed in any::<bool>()) {
        let a = arch(3, r, Factor::integer(2).max(r));
        let mode = if packed { ExecMode::Packed } else { ExecMode::Serial };
        let s = compile(&c, &a, CompileOptions { mode, ..CompileOptions::default() }).unwrap();
        prop_assert_eq!(verify_schedule(&s, &c, &a), vec![]);
        prop_assert_eq!(s.counters.m, c.gate_count());
        match mode {
            ExecMode::Serial => prop_assert_eq!(s.counters.h, c.gate_count()),
            ExecMode::Packed => prop_assert!(s.counters.h <= c.gate_count()),
        }
    }

    #[test]
    fn log_space_matches_direct_product(
        n in 1usize..30, m in 0usize..=100, extra in 0usize..50, s in 0usize..60, d in 0.0f64..500.0,
        f_trans in 0.95f64..=1.0,
    ) {
        let p = HardwareParams { f_trans, ..HardwareParams::default() };
        let k = Counters { n, m, h: m + extra, s, d_um: d, ..Counters::default() };
        let f = success_probability(&k, &p).unwrap();
        let direct = common::direct_fidelity(n, m, m + extra, s, d, &p);
        prop_assert!(((f - direct) / direct).abs() < 1e-9, "{} vs {}", f, direct);
        prop_assert!(f > 0.0 && f <= 1.0);
        let t = exec_time(&k, &p);
        prop_assert!(t.as_us() >= (m + extra) as f64 * p.t_cz - 1e-9);
        prop_assert!(idle_time(n, t, m, &p).unwrap().as_us() >= 0.0);
    }

    #[test]
    fn fidelity_is_monotone(
        n in 2usize..30, m in 1usize..300, s in 0usize..100, d in 0.0f64..500.0, axis in 0usize..8,
    ) {
        let base = HardwareParams { f_trans: 0.999, ..HardwareParams::default() };
        let k = Counters { n, m, h: m, s, d_um: d, ..Counters::default() };
        let f0 = success_probability(&k, &base).unwrap();
        // Each perturbation is one that must not raise F.
        let (k1, p1) = match axis {
            0 => (Counters { m: m + 1, h: m + 1, ..k }, base),
            1 => (Counters { s: s + 2, ..k }, base),
            2 => (Counters { d_um: d * 1.1 + 1.0, ..k }, base),
            3 => (Counters { h: m + 5, ..k }, base),
            4 => (k, HardwareParams { t2: base.t2 * 0.9, ..base }),
            5 => (k, HardwareParams { f_cz: base.f_cz * 0.99, ..base }),
            6 => (k, HardwareParams { f_trans: base.f_trans * 0.99, ..base }),
            _ => (k, HardwareParams { v: base.v * 0.9, ..base }),
        };
        let f1 = success_probability(&k1, &p1).unwrap();
        prop_assert!(f1 <= f0 * (1.0 + 1e-12), "axis {}: {} > {}", axis, f1, f0);
    }

    #[test]
    fn zero_movement_closed_form(n in 1usize..40, m in 0usize..2000) {
        let p = HardwareParams::default();
        let k = Counters { n, m, h: m, ..Counters::default() };
        let f = success_probability(&k, &p).unwrap();
        let closed = p.f_cz.powi(m as i32) * (-((n - 1) as f64) * m as f64 * p.t_cz / p.t2).exp();
        prop_assert!(((f - closed) / closed).abs() < 1e-9);
    }
}

#[test]
fn more_connectivity_never_needs_more_subcircuits() {
    for n in 4..=10 {
        let c = generate(Family::Qft, n, GenOptions::default()).unwrap();
        let b = nacc_core::arch::side_for(n);
        let parts = |r| divide_circuit(&c, &arch(b, r, Factor::integer(4)), DivideOptions::default()).unwrap().len();
        assert!(parts(Factor::integer(2)) <= parts(Factor::integer(1)), "qft {n}");
        assert!(parts(Factor::sqrt(2)) <= parts(Factor::integer(1)), "qft {n}");
    }
}

#[test]
fn conflict_graph_edges_follow_compatibility() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let a = arch(5, Factor::integer(2), Factor::integer(4));
    for _ in 0..50 {
        let f = common::random_mapping(10, &a, &mut rng);
        let f2 = common::random_mapping(10, &a, &mut rng);
        let moves = extract_moves(&f, &f2).unwrap();
        let g: Graph = conflict_graph(&moves);
        for i in 0..moves.len() {
            for j in i + 1..moves.len() {
                assert_eq!(g.has_edge(i, j), !compatible(&moves[i], &moves[j]));
            }
        }
    }
}
