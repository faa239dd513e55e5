//! Candidate colorings and the edge-fraction correctness score.

use std::collections::BTreeMap;

use thiserror::Error;

use super::GraphInstance;
use crate::num::Scalar;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CandidateKind {
    /// Vertex → color. Colors are kept as written, including values outside
    /// `1..=k`, so scoring can penalize them.
    Assignment(BTreeMap<String, i64>),
    NotSolvableClaim,
    ParseFailure,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColoringCandidate {
    pub kind: CandidateKind,
    /// Identifiers the solver used that are not vertices of the instance.
    pub unknown_vertices: Vec<String>,
    pub raw_text: String,
}

impl ColoringCandidate {
    pub fn assignment(pairs: impl IntoIterator<Item = (impl Into<String>, i64)>) -> Self {
        let map: BTreeMap<String, i64> = pairs.into_iter().map(|(v, c)| (v.into(), c)).collect();
        Self {
            kind: CandidateKind::Assignment(map),
            unknown_vertices: Vec::new(),
            raw_text: String::new(),
        }
    }

    pub fn not_solvable() -> Self {
        Self {
            kind: CandidateKind::NotSolvableClaim,
            unknown_vertices: Vec::new(),
            raw_text: "NOT SOLVABLE".into(),
        }
    }

    pub fn parse_failure(raw: impl Into<String>) -> Self {
        Self {
            kind: CandidateKind::ParseFailure,
            unknown_vertices: Vec::new(),
            raw_text: raw.into(),
        }
    }

    pub fn colors(&self) -> Option<&BTreeMap<String, i64>> {
        match &self.kind {
            CandidateKind::Assignment(map) => Some(map),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Assignment,
    /// A NOT SOLVABLE claim; `correct` is the oracle's agreement.
    NotSolvableClaim {
        correct: bool,
    },
    ParseFailure,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConflictReport<S> {
    pub verdict: Verdict,
    /// Equal-color edges `(u, v, color)`, lower-index endpoint first.
    pub conflicts: Vec<(String, String, i64)>,
    /// Endpoints of `conflicts`, deduplicated, in graph vertex order.
    pub conflict_vertices: Vec<String>,
    pub uncolored: Vec<String>,
    pub out_of_range: Vec<(String, i64)>,
    pub unknown_vertices: Vec<String>,
    /// Constraints violated / constraints counted; `score = 1 - violated/total`
    /// for assignments.
    pub violated: u64,
    pub total: u64,
    pub score: S,
}

impl<S: Scalar> ConflictReport<S> {
    pub fn is_valid(&self) -> bool {
        self.score == S::one()
    }

    fn empty(verdict: Verdict, score: S) -> Self {
        Self {
            verdict,
            conflicts: Vec::new(),
            conflict_vertices: Vec::new(),
            uncolored: Vec::new(),
            out_of_range: Vec::new(),
            unknown_vertices: Vec::new(),
            violated: 0,
            total: 0,
            score,
        }
    }
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("NOT SOLVABLE claim cannot be scored: instance has no solvability label")]
pub struct MissingLabel;

/// Fraction of satisfied edges. An edge is violated when its endpoints share
/// a color, or when either endpoint is uncolored or colored outside `1..=k`.
/// Isolated vertices without an in-range color each add one violated
/// constraint to both numerator and denominator, so a score of one always
/// means a complete proper coloring. An empty edge set scores one for any
/// complete in-range assignment.
pub fn score<S: Scalar>(inst: &GraphInstance, cand: &ColoringCandidate) -> Result<ConflictReport<S>, MissingLabel> {
    let map = match &cand.kind {
        CandidateKind::NotSolvableClaim => {
            let solvable = inst.meta.solvable.ok_or(MissingLabel)?;
            let score = if solvable { S::zero() } else { S::one() };
            return Ok(ConflictReport::empty(
                Verdict::NotSolvableClaim { correct: !solvable },
                score,
            ));
        }
        CandidateKind::ParseFailure => {
            let mut report = ConflictReport::empty(Verdict::ParseFailure, S::zero());
            report.unknown_vertices = cand.unknown_vertices.clone();
            return Ok(report);
        }
        CandidateKind::Assignment(map) => map,
    };

    let g = &inst.graph;
    let k = inst.k as i64;
    let colors: Vec<Option<i64>> = g.vertices().iter().map(|v| map.get(v).copied()).collect();
    let in_range = |c: Option<i64>| matches!(c, Some(c) if (1..=k).contains(&c));

    let mut report = ConflictReport::empty(Verdict::Assignment, S::zero());
    report.unknown_vertices = cand.unknown_vertices.clone();
    for (i, v) in g.vertices().iter().enumerate() {
        match colors[i] {
            None => report.uncolored.push(v.clone()),
            Some(c) if !in_range(Some(c)) => report.out_of_range.push((v.clone(), c)),
            Some(_) => {}
        }
    }

    let mut in_conflict = vec![false; g.vertex_count()];
    let mut violated = 0u64;
    for (a, b) in g.edge_indices() {
        let (ca, cb) = (colors[a], colors[b]);
        if let (Some(x), Some(y)) = (ca, cb) {
            if x == y {
                report
                    .conflicts
                    .push((g.vertices()[a].clone(), g.vertices()[b].clone(), x));
                in_conflict[a] = true;
                in_conflict[b] = true;
            }
        }
        if !in_range(ca) || !in_range(cb) || ca == cb {
            violated += 1;
        }
    }

    let degrees = g.degrees();
    let isolated_bad = (0..g.vertex_count())
        .filter(|&i| degrees[i] == 0 && !in_range(colors[i]))
        .count() as u64;

    report.conflict_vertices = g
        .vertices()
        .iter()
        .zip(&in_conflict)
        .filter(|(_, &c)| c)
        .map(|(v, _)| v.clone())
        .collect();
    report.violated = violated + isolated_bad;
    report.total = g.edge_count() as u64 + isolated_bad;
    report.score = if report.total == 0 {
        S::one()
    } else {
        S::from_ratio(report.total - report.violated, report.total)
    };
    Ok(report)
}
