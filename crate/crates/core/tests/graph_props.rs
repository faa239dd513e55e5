mod common;

use std::collections::BTreeMap;
use std::time::Duration;

use fastslow_core::gc::{parse_coloring, render_assignment};
use fastslow_core::graph::{
    emit_dimacs, emit_dimacs_compact, exact_color, generate_instance, parse_dimacs, score, ColorOutcome,
    ColoringCandidate,
};
use fastslow_core::Exact;
use num_traits::{One, Zero};
use proptest::prelude::*;

use common::{brute_force_coloring, recount_score};

fn instance() -> impl Strategy<Value = (usize, f64, u64, u32)> {
    (1usize..=12, 0.0f64..=1.0, any::<u64>(), 1u32..=5)
}

proptest! {
    #[test]
    fn dimacs_round_trip((n, p, seed, k) in instance()) {
        let inst = generate_instance(n, p, seed, k);
        for text in [emit_dimacs(&inst.graph), emit_dimacs_compact(&inst.graph)] {
            let back = parse_dimacs(&text).unwrap();
            prop_assert_eq!(back.vertex_set(), inst.graph.vertex_set());
            prop_assert_eq!(back.edge_set(), inst.graph.edge_set());
        }
    }

    #[test]
    fn score_matches_recount(
        (n, p, seed, k) in instance(),
        raw in prop::collection::vec(prop::option::of(-1i64..=6), 12),
    ) {
        let inst = generate_instance(n, p, seed, k);
        let colors: BTreeMap<String, i64> = inst
            .graph
            .vertices()
            .iter()
            .zip(&raw)
            .filter_map(|(v, c)| c.map(|c| (v.clone(), c)))
            .collect();
        let report = score::<Exact>(&inst, &ColoringCandidate::assignment(colors.clone())).unwrap();
        prop_assert_eq!(report.score, recount_score(&inst, &colors));
        prop_assert!(report.score >= Exact::zero() && report.score <= Exact::one());
        let proper = inst.graph.vertices().iter().all(|v| colors.get(v).is_some_and(|&c| c >= 1 && c <= k as i64))
            && inst.graph.edges().all(|(u, v)| colors[u] != colors[v]);
        prop_assert_eq!(report.is_valid(), proper);
    }

    #[test]
    fn assignment_text_round_trip((n, p, seed, k) in instance(), shift in 0i64..5) {
        let inst = generate_instance(n, p, seed, k);
        let colors: BTreeMap<String, i64> = inst
            .graph
            .vertices()
            .iter()
            .enumerate()
            .map(|(i, v)| (v.clone(), (i as i64 + shift) % k as i64 + 1))
            .collect();
        let cand = parse_coloring(&render_assignment(&colors), &inst);
        prop_assert_eq!(cand.colors(), Some(&colors));
    }

    #[test]
    fn induced_subgraph_keeps_only_inner_edges((n, p, seed, k) in instance(), mask in any::<u16>()) {
        let inst = generate_instance(n, p, seed, k);
        let keep: Vec<String> = inst
            .graph
            .vertices()
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, v)| v.clone())
            .collect();
        let sub = inst.induced_subgraph(&keep).unwrap();
        prop_assert_eq!(sub.graph.vertex_count(), keep.len());
        for (u, v) in inst.graph.edges() {
            let inside = keep.iter().any(|x| x == u) && keep.iter().any(|x| x == v);
            prop_assert_eq!(sub.graph.has_edge(u, v), inside);
        }
        prop_assert!(sub.graph.edge_count() <= inst.graph.edge_count());
    }

    #[test]
    fn oracle_agrees_with_enumeration(n in 1usize..=7, p in 0.0f64..=1.0, seed in any::<u64>(), k in 1u32..=4) {
        let inst = generate_instance(n, p, seed, k);
        let edges: Vec<(usize, usize)> = inst.graph.edge_indices().collect();
        let brute = brute_force_coloring(n, &edges, k);
        match exact_color(&inst, Duration::from_secs(10)) {
            ColorOutcome::Solution(colors) => {
                prop_assert!(brute.is_some());
                prop_assert!(colors.iter().all(|&c| c >= 1 && c <= k));
                prop_assert!(edges.iter().all(|&(u, v)| colors[u] != colors[v]));
            }
            ColorOutcome::Unsolvable => prop_assert!(brute.is_none()),
            ColorOutcome::Timeout => prop_assert!(false, "oracle timed out on {} vertices", n),
        }
    }
}

#[test]
fn sparse_graphs_keep_isolated_vertices() {
    let mut seen_isolated = 0;
    for seed in 0..200 {
        let inst = generate_instance(20, 0.1, seed, 4);
        let text = emit_dimacs(&inst.graph);
        if inst.graph.degrees().contains(&0) {
            seen_isolated += 1;
            assert!(text.lines().nth(1).unwrap().starts_with("c vertices:"));
        }
        let back = parse_dimacs(&text).unwrap();
        assert_eq!(back.vertex_count(), 20);
    }
    assert!(seen_isolated > 0);
}
