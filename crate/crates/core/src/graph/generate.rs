use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Graph, GraphInstance, InstanceMeta};

/// Name of vertex `i` (0-based) in an `n`-vertex generated graph: single
/// letters `a..z` up to 26 vertices, `v1..vn` beyond.
pub fn vertex_name(i: usize, n: usize) -> String {
    if n <= 26 {
        char::from(b'a' + i as u8).to_string()
    } else {
        format!("v{}", i + 1)
    }
}

/// Erdős–Rényi draw: each unordered pair is kept independently with
/// probability `edge_prob`, pairs visited in `(i, j)` lexicographic order.
pub fn generate_instance(n: usize, edge_prob: f64, seed: u64, k: u32) -> GraphInstance {
    assert!(n >= 1, "instance needs at least one vertex");
    assert!((0.0..=1.0).contains(&edge_prob), "edge probability outside [0, 1]");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut graph = Graph::with_vertices((0..n).map(|i| vertex_name(i, n)));
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen::<f64>() < edge_prob {
                graph.add_edge_indices(i, j);
            }
        }
    }
    GraphInstance {
        graph,
        k,
        meta: InstanceMeta {
            size: n,
            edge_prob,
            seed,
            solvable: None,
        },
    }
}
