//! Graph-coloring instance model.
//!
//! A [`Graph`] keeps vertices in first-appearance order and stores each
//! undirected edge once as an index pair `(lo, hi)` with `lo < hi`. All
//! orderings that leak out of this module (edge iteration, conflict lists)
//! follow vertex insertion order, which keeps prompts and reports stable.

mod dimacs;
mod generate;
mod oracle;
mod score;

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use dimacs::{emit_dimacs, emit_dimacs_compact, parse_dimacs, DimacsError};
pub use generate::{generate_instance, vertex_name};
pub use oracle::{exact_color, label_solvability, ColorOutcome, OracleTimeout};
pub use score::{score, CandidateKind, ColoringCandidate, ConflictReport, MissingLabel, Verdict};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("self-loop on vertex {0}")]
    SelfLoop(String),
    #[error("unknown vertex {0}")]
    UnknownVertex(String),
}

/// Undirected simple graph over case-sensitive string identifiers.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Graph {
    vertices: Vec<String>,
    index: HashMap<String, usize>,
    edges: BTreeSet<(usize, usize)>,
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Graph with the given vertices and no edges. Duplicates are ignored.
    pub fn with_vertices<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut g = Self::new();
        for name in names {
            g.add_vertex(name);
        }
        g
    }

    /// Adds a vertex if absent and returns its index.
    pub fn add_vertex(&mut self, name: impl Into<String>) -> usize {
        let name = name.into();
        if let Some(&i) = self.index.get(&name) {
            return i;
        }
        let i = self.vertices.len();
        self.index.insert(name.clone(), i);
        self.vertices.push(name);
        i
    }

    /// Adds an undirected edge, creating endpoints as needed. Returns `false`
    /// when the edge was already present.
    pub fn add_edge(&mut self, u: &str, v: &str) -> Result<bool, GraphError> {
        if u == v {
            return Err(GraphError::SelfLoop(u.to_string()));
        }
        let a = self.add_vertex(u);
        let b = self.add_vertex(v);
        Ok(self.edges.insert((a.min(b), a.max(b))))
    }

    fn add_edge_indices(&mut self, a: usize, b: usize) -> bool {
        debug_assert!(a != b && a < self.vertices.len() && b < self.vertices.len());
        self.edges.insert((a.min(b), a.max(b)))
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn contains_vertex(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn has_edge(&self, u: &str, v: &str) -> bool {
        match (self.index_of(u), self.index_of(v)) {
            (Some(a), Some(b)) => self.edges.contains(&(a.min(b), a.max(b))),
            _ => false,
        }
    }

    /// Edges as index pairs `(lo, hi)`, ordered by vertex insertion order.
    pub fn edge_indices(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    /// Edges as name pairs, lower-index endpoint first.
    pub fn edges(&self) -> impl Iterator<Item = (&str, &str)> + '_ {
        self.edges
            .iter()
            .map(|&(a, b)| (self.vertices[a].as_str(), self.vertices[b].as_str()))
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.vertices.len()];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        adj
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.vertices.len()];
        for &(a, b) in &self.edges {
            deg[a] += 1;
            deg[b] += 1;
        }
        deg
    }

    pub fn vertex_set(&self) -> BTreeSet<String> {
        self.vertices.iter().cloned().collect()
    }

    /// Order-independent edge set with lexicographically sorted endpoints.
    pub fn edge_set(&self) -> BTreeSet<(String, String)> {
        self.edges()
            .map(|(u, v)| {
                if u <= v {
                    (u.to_string(), v.to_string())
                } else {
                    (v.to_string(), u.to_string())
                }
            })
            .collect()
    }

    /// Same vertex and edge sets, regardless of insertion order.
    pub fn same_structure(&self, other: &Graph) -> bool {
        self.vertex_set() == other.vertex_set() && self.edge_set() == other.edge_set()
    }

    /// Subgraph induced by `vs`, keeping this graph's vertex order.
    pub fn induced_subgraph<S: AsRef<str>>(&self, vs: &[S]) -> Result<Graph, GraphError> {
        let mut keep = vec![false; self.vertices.len()];
        for v in vs {
            let i = self
                .index_of(v.as_ref())
                .ok_or_else(|| GraphError::UnknownVertex(v.as_ref().to_string()))?;
            keep[i] = true;
        }
        let mut sub = Graph::new();
        let mut remap = vec![usize::MAX; self.vertices.len()];
        for (i, name) in self.vertices.iter().enumerate() {
            if keep[i] {
                remap[i] = sub.add_vertex(name.clone());
            }
        }
        for &(a, b) in &self.edges {
            if keep[a] && keep[b] {
                sub.add_edge_indices(remap[a], remap[b]);
            }
        }
        Ok(sub)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceMeta {
    pub size: usize,
    pub edge_prob: f64,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solvable: Option<bool>,
}

/// A graph plus its color budget `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphInstance {
    pub graph: Graph,
    pub k: u32,
    pub meta: InstanceMeta,
}

impl GraphInstance {
    /// Wraps a parsed or hand-built graph. Panics if `k == 0`.
    pub fn new(graph: Graph, k: u32) -> Self {
        assert!(k >= 1, "color budget must be positive");
        let meta = InstanceMeta {
            size: graph.vertex_count(),
            edge_prob: 0.0,
            seed: 0,
            solvable: None,
        };
        Self { graph, k, meta }
    }

    pub fn with_label(mut self, solvable: bool) -> Self {
        self.meta.solvable = Some(solvable);
        self
    }

    /// Subgraph induced by `vs`; inherits `k`, label is cleared.
    pub fn induced_subgraph<S: AsRef<str>>(&self, vs: &[S]) -> Result<GraphInstance, GraphError> {
        let sub = self.graph.induced_subgraph(vs)?;
        Ok(GraphInstance::new(sub, self.k))
    }
}
