//! Exact k-coloring decision oracle.
//!
//! Plain chronological backtracking over a static order (descending degree,
//! ties by identifier) with forward checking on neighbor domains. A vertex may
//! only open one color beyond the largest color used so far, which removes
//! color-permutation symmetry without losing completeness.

use std::time::{Duration, Instant};

use thiserror::Error;

use super::GraphInstance;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColorOutcome {
    /// Colors in `1..=k`, indexed like the graph's vertices.
    Solution(Vec<u32>),
    Unsolvable,
    Timeout,
}

impl ColorOutcome {
    pub fn is_solution(&self) -> bool {
        matches!(self, ColorOutcome::Solution(_))
    }
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("oracle exceeded its {0:?} budget")]
pub struct OracleTimeout(pub Duration);

struct Search<'a> {
    adj: &'a [Vec<usize>],
    order: Vec<usize>,
    k: usize,
    words: usize,
    domains: Vec<Vec<u64>>,
    sizes: Vec<usize>,
    colors: Vec<Option<usize>>,
    deadline: Instant,
    nodes: u64,
    timed_out: bool,
}

impl Search<'_> {
    fn has(&self, v: usize, c: usize) -> bool {
        self.domains[v][c / 64] & (1 << (c % 64)) != 0
    }

    fn remove(&mut self, v: usize, c: usize) {
        self.domains[v][c / 64] &= !(1 << (c % 64));
        self.sizes[v] -= 1;
    }

    fn restore(&mut self, v: usize, c: usize) {
        self.domains[v][c / 64] |= 1 << (c % 64);
        self.sizes[v] += 1;
    }

    fn solve(&mut self, depth: usize, max_used: Option<usize>) -> bool {
        if depth == self.order.len() {
            return true;
        }
        self.nodes += 1;
        if self.nodes % 1024 == 1 && Instant::now() >= self.deadline {
            self.timed_out = true;
        }
        if self.timed_out {
            return false;
        }

        let v = self.order[depth];
        let limit = match max_used {
            Some(m) => (m + 2).min(self.k),
            None => 1.min(self.k),
        };
        let mut trail = Vec::new();
        for c in 0..limit {
            if !self.has(v, c) {
                continue;
            }
            self.colors[v] = Some(c);
            trail.clear();
            let mut wiped = false;
            let adj = self.adj;
            for &w in &adj[v] {
                if self.colors[w].is_none() && self.has(w, c) {
                    self.remove(w, c);
                    trail.push(w);
                    if self.sizes[w] == 0 {
                        wiped = true;
                        break;
                    }
                }
            }
            if !wiped {
                let used = Some(max_used.map_or(c, |m| m.max(c)));
                if self.solve(depth + 1, used) {
                    return true;
                }
            }
            for &w in &trail {
                self.restore(w, c);
            }
            self.colors[v] = None;
            if self.timed_out {
                return false;
            }
        }
        false
    }
}

/// Decides whether `inst` has a proper coloring with at most `inst.k` colors.
/// Deterministic for a fixed input; `Timeout` only when `budget` runs out.
pub fn exact_color(inst: &GraphInstance, budget: Duration) -> ColorOutcome {
    let g = &inst.graph;
    let n = g.vertex_count();
    let k = inst.k as usize;
    if n == 0 {
        return ColorOutcome::Solution(Vec::new());
    }
    let adj = g.adjacency();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        adj[b]
            .len()
            .cmp(&adj[a].len())
            .then_with(|| g.vertices()[a].cmp(&g.vertices()[b]))
    });

    let words = k.div_ceil(64).max(1);
    let mut full = vec![0u64; words];
    for c in 0..k {
        full[c / 64] |= 1 << (c % 64);
    }
    let mut search = Search {
        adj: &adj,
        order,
        k,
        words,
        domains: vec![full; n],
        sizes: vec![k; n],
        colors: vec![None; n],
        deadline: Instant::now() + budget,
        nodes: 0,
        timed_out: false,
    };
    debug_assert_eq!(search.domains[0].len(), search.words);

    if search.solve(0, None) {
        let colors = search
            .colors
            .iter()
            .map(|c| c.expect("complete assignment") as u32 + 1)
            .collect();
        ColorOutcome::Solution(colors)
    } else if search.timed_out {
        ColorOutcome::Timeout
    } else {
        ColorOutcome::Unsolvable
    }
}

/// Sets `meta.solvable` from the oracle.
pub fn label_solvability(mut inst: GraphInstance, budget: Duration) -> Result<GraphInstance, OracleTimeout> {
    match exact_color(&inst, budget) {
        ColorOutcome::Solution(_) => inst.meta.solvable = Some(true),
        ColorOutcome::Unsolvable => inst.meta.solvable = Some(false),
        ColorOutcome::Timeout => return Err(OracleTimeout(budget)),
    }
    Ok(inst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_instance, Graph};

    const BUDGET: Duration = Duration::from_secs(10);

    fn inst(edges: &[(&str, &str)], k: u32) -> GraphInstance {
        let mut g = Graph::new();
        for (u, v) in edges {
            g.add_edge(u, v).unwrap();
        }
        GraphInstance::new(g, k)
    }

    fn proper(inst: &GraphInstance, colors: &[u32]) -> bool {
        colors.iter().all(|&c| c >= 1 && c <= inst.k) && inst.graph.edge_indices().all(|(a, b)| colors[a] != colors[b])
    }

    #[test]
    fn complete_graphs() {
        let k4 = generate_instance(4, 1.0, 0, 3);
        assert_eq!(exact_color(&k4, BUDGET), ColorOutcome::Unsolvable);
        let tri = inst(&[("a", "b"), ("b", "c"), ("a", "c")], 3);
        match exact_color(&tri, BUDGET) {
            ColorOutcome::Solution(c) => {
                assert!(proper(&tri, &c));
                let mut sorted = c.clone();
                sorted.sort();
                assert_eq!(sorted, [1, 2, 3]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn labels() {
        let k4 = label_solvability(generate_instance(4, 1.0, 0, 3), BUDGET).unwrap();
        assert_eq!(k4.meta.solvable, Some(false));
        let edgeless = label_solvability(generate_instance(6, 0.0, 0, 1), BUDGET).unwrap();
        assert_eq!(edgeless.meta.solvable, Some(true));
        let path = label_solvability(inst(&[("a", "b"), ("b", "c")], 2), BUDGET).unwrap();
        assert_eq!(path.meta.solvable, Some(true));
    }

    #[test]
    fn triangle_with_ties_follows_identifier_order() {
        let tri = inst(&[("h", "i"), ("h", "j"), ("i", "j")], 4);
        assert_eq!(exact_color(&tri, BUDGET), ColorOutcome::Solution(vec![1, 2, 3]));
    }

    #[test]
    fn large_k_uses_multiple_words() {
        let big = generate_instance(70, 1.0, 1, 70);
        let ColorOutcome::Solution(c) = exact_color(&big, BUDGET) else {
            panic!("K70 is 70-colorable");
        };
        assert!(proper(&big, &c));
        let short = GraphInstance { k: 69, ..big };
        assert_eq!(exact_color(&short, BUDGET), ColorOutcome::Unsolvable);
    }

    #[test]
    fn zero_budget_times_out_on_hard_instance() {
        let hard = generate_instance(60, 0.5, 3, 5);
        assert_eq!(exact_color(&hard, Duration::ZERO), ColorOutcome::Timeout);
        assert!(label_solvability(hard, Duration::ZERO).is_err());
    }
}
