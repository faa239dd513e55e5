//! DIMACS-like text format.
//!
//! Parsing accepts `p edge`/`p edges` headers, `e u v` edge lines, bare
//! `u v` lines and comma-separated bare pairs on one line. Emission is
//! canonical: `p edge N M`, exactly one comment line, then sorted `e u v`
//! lines. The comment line is a `c vertices: ...` roster when some vertex has
//! no incident edge, otherwise `c edges`.

use thiserror::Error;

use super::generate::vertex_name;
use super::{Graph, GraphError};

const ROSTER_PREFIX: &str = "c vertices:";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DimacsError {
    #[error("missing `p` header line")]
    MissingHeader,
    #[error(
        "declared {declared_vertices} vertices / {declared_edges} edges, parsed {parsed_vertices} / {parsed_edges}"
    )]
    CountMismatch {
        declared_vertices: usize,
        declared_edges: usize,
        parsed_vertices: usize,
        parsed_edges: usize,
    },
    #[error("line {line}: malformed `{content}`")]
    MalformedLine { line: usize, content: String },
    #[error("line {line}: self-loop on vertex {vertex}")]
    SelfLoop { line: usize, vertex: String },
}

pub fn parse_dimacs(text: &str) -> Result<Graph, DimacsError> {
    let mut graph = Graph::new();
    let mut header: Option<(usize, usize)> = None;
    let mut roster = false;
    let mut edge_lines = 0usize;
    let mut e_style = false;

    let malformed = |line: usize, content: &str| DimacsError::MalformedLine {
        line,
        content: content.to_string(),
    };

    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let t = raw.trim();
        if t.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = t.split_whitespace().collect();
        // Bare edge lists collide with one-letter vertex names: `c f` and
        // `e h` are pairs, not a comment or a malformed edge line. A two-token
        // `c` line is a comment before the header, in files using `e` lines,
        // or when it reads `c edges`.
        let bare_c = tokens[0] == "c" && tokens.len() == 2 && header.is_some() && !e_style && tokens[1] != "edges";
        match tokens[0] {
            "c" if !bare_c => {
                if let Some(rest) = t.strip_prefix(ROSTER_PREFIX) {
                    roster = true;
                    for name in rest.split_whitespace() {
                        graph.add_vertex(name);
                    }
                }
            }
            "p" => {
                if header.is_some() || tokens.len() != 4 {
                    return Err(malformed(line, t));
                }
                let nv = tokens[2].parse().map_err(|_| malformed(line, t))?;
                let ne = tokens[3].parse().map_err(|_| malformed(line, t))?;
                header = Some((nv, ne));
            }
            // A two-token line starting with `e` is a bare pair naming vertex `e`.
            "e" if tokens.len() != 2 => {
                if tokens.len() != 3 {
                    return Err(malformed(line, t));
                }
                add_edge(&mut graph, line, tokens[1], tokens[2])?;
                edge_lines += 1;
                e_style = true;
            }
            _ => {
                for segment in t.split(',') {
                    let pair: Vec<&str> = segment.split_whitespace().collect();
                    if pair.len() != 2 {
                        return Err(malformed(line, t));
                    }
                    add_edge(&mut graph, line, pair[0], pair[1])?;
                    edge_lines += 1;
                }
            }
        }
    }

    let (declared_vertices, declared_edges) = header.ok_or(DimacsError::MissingHeader)?;
    let mismatch = |g: &Graph| DimacsError::CountMismatch {
        declared_vertices,
        declared_edges,
        parsed_vertices: g.vertex_count(),
        parsed_edges: g.edge_count(),
    };

    // Some producers list both directions of every edge.
    if graph.edge_count() != declared_edges && edge_lines != declared_edges {
        return Err(mismatch(&graph));
    }
    if graph.vertex_count() > declared_vertices {
        return Err(mismatch(&graph));
    }
    if graph.vertex_count() < declared_vertices && (roster || !pad_isolated(&mut graph, declared_vertices)) {
        return Err(mismatch(&graph));
    }
    Ok(graph)
}

fn add_edge(graph: &mut Graph, line: usize, u: &str, v: &str) -> Result<(), DimacsError> {
    match graph.add_edge(u, v) {
        Ok(_) => Ok(()),
        Err(GraphError::SelfLoop(vertex)) => Err(DimacsError::SelfLoop { line, vertex }),
        Err(GraphError::UnknownVertex(_)) => unreachable!("add_edge creates endpoints"),
    }
}

/// Synthesizes isolated vertices missing from a roster-less file. Works when
/// all seen names are DIMACS numerals `1..=n`, or all come from the generator
/// naming scheme for `n` vertices.
fn pad_isolated(graph: &mut Graph, n: usize) -> bool {
    let numeric = graph.vertex_count() > 0
        && graph
            .vertices()
            .iter()
            .all(|v| matches!(v.parse::<usize>(), Ok(i) if (1..=n).contains(&i) && *v == i.to_string()));
    let names: Vec<String> = if numeric {
        (1..=n).map(|i| i.to_string()).collect()
    } else {
        (0..n).map(|i| vertex_name(i, n)).collect()
    };
    if !graph.vertices().iter().all(|v| names.contains(v)) {
        return false;
    }
    for name in names {
        graph.add_vertex(name);
    }
    true
}

fn sorted_edges(g: &Graph) -> Vec<(String, String)> {
    // edge_set already sorts endpoints and edges lexicographically.
    g.edge_set().into_iter().collect()
}

fn roster_line(g: &Graph) -> Option<String> {
    let deg = g.degrees();
    if deg.iter().all(|&d| d > 0) {
        return None;
    }
    Some(format!("{ROSTER_PREFIX} {}", g.vertices().join(" ")))
}

/// Canonical serialization; `parse_dimacs` inverts it on vertex and edge sets.
pub fn emit_dimacs(g: &Graph) -> String {
    let mut lines = vec![format!("p edge {} {}", g.vertex_count(), g.edge_count())];
    lines.push(roster_line(g).unwrap_or_else(|| "c edges".to_string()));
    lines.extend(sorted_edges(g).into_iter().map(|(u, v)| format!("e {u} {v}")));
    lines.join("\n")
}

/// Like [`emit_dimacs`] but without the `c edges` comment; the roster line is
/// still written when isolated vertices exist.
pub fn emit_dimacs_compact(g: &Graph) -> String {
    let mut lines = vec![format!("p edge {} {}", g.vertex_count(), g.edge_count())];
    lines.extend(roster_line(g));
    lines.extend(sorted_edges(g).into_iter().map(|(u, v)| format!("e {u} {v}")));
    lines.join("\n")
}
