//! Graph-coloring domain: prompts, answer parsing, conflict feedback and
//! adaptive subproblem examples.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::{Arc, OnceLock};
use std::time::Duration;

use regex::Regex;

use crate::graph::{
    emit_dimacs_compact, exact_color, label_solvability, score, CandidateKind, ColorOutcome, ColoringCandidate,
    ConflictReport, GraphInstance, Verdict,
};
use crate::memory::{MemoryRecord, ProblemInstance};
use crate::metacog::{
    build_s1_prompt as compose_prompt, AdapterError, BaRule, DomainAdapter, FeedbackVariant, HistoryItem, RunConfig,
};
use crate::num::Scalar;
use crate::solvers::{ColoringContext, RequestContext, SolverError};
use crate::template::{self, render};

pub const NOT_SOLVABLE: &str = "NOT SOLVABLE";

/// Largest conflict subgraph shown as an adaptive example.
pub const ADAPTIVE_MAX_VERTICES: usize = 8;

const INCORRECT: &str = "That was incorrect.";

fn pair_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\(\s*([^\s()]+)\s+(-?\d{1,18})\s*\)").expect("valid regex"))
}

/// One `(vertex color)` pair per line, vertices in lexicographic order.
pub fn render_assignment(map: &BTreeMap<String, i64>) -> String {
    map.iter()
        .map(|(v, c)| format!("({v} {c})"))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Reads a solver answer. Pairs may share a line or sit among prose; the
/// last pair for a vertex wins. Identifiers absent from `inst` are dropped
/// and listed in `unknown_vertices`.
pub fn parse_coloring(raw: &str, inst: &GraphInstance) -> ColoringCandidate {
    if raw.trim() == NOT_SOLVABLE {
        return ColoringCandidate {
            raw_text: raw.to_string(),
            ..ColoringCandidate::not_solvable()
        };
    }
    let mut map = BTreeMap::new();
    let mut unknown = Vec::new();
    let mut pairs = 0usize;
    for cap in pair_regex().captures_iter(raw) {
        let Ok(color) = cap[2].parse::<i64>() else { continue };
        pairs += 1;
        let v = &cap[1];
        if inst.graph.contains_vertex(v) {
            map.insert(v.to_string(), color);
        } else if !unknown.iter().any(|u| u == v) {
            unknown.push(v.to_string());
        }
    }
    if pairs == 0 {
        return ColoringCandidate::parse_failure(raw);
    }
    ColoringCandidate {
        kind: CandidateKind::Assignment(map),
        unknown_vertices: unknown,
        raw_text: raw.to_string(),
    }
}

/// Graph block in the prompt dialect: `p edges` header, one comment line and
/// bare `u v` pairs, each line indented by one space.
pub fn prompt_graph_block(inst: &GraphInstance) -> String {
    let g = &inst.graph;
    let mut lines = vec![format!(" p edges {} {}", g.vertex_count(), g.edge_count())];
    let degrees = g.degrees();
    if degrees.contains(&0) {
        lines.push(format!(" c vertices: {}", g.vertices().join(" ")));
    } else {
        lines.push(" c edges".to_string());
    }
    lines.extend(g.edges().map(|(u, v)| format!(" {u} {v}")));
    lines.join("\n")
}

pub fn task_title(k: u32) -> String {
    format!("Graph Coloring Decision Problem (< {} colors)", k + 1)
}

pub fn task_block(inst: &GraphInstance) -> String {
    let k = inst.k.to_string();
    let k1 = (inst.k + 1).to_string();
    let graph = prompt_graph_block(inst);
    render(template::GC_TASK, &[("k", &k), ("k_plus_one", &k1), ("graph", &graph)])
        .trim_end()
        .to_string()
}

pub fn problem_instance(inst: &GraphInstance) -> ProblemInstance {
    ProblemInstance::GraphColoring {
        task: task_title(inst.k),
        graph: prompt_graph_block(inst).trim_start().to_string(),
        k: inst.k,
        size: inst.graph.vertex_count(),
    }
}

/// Worked examples from memory, placed ahead of the task.
pub fn render_memory(records: &[MemoryRecord]) -> String {
    let mut blocks = Vec::new();
    for (n, r) in records.iter().enumerate() {
        let mut b = format!("### Worked Example {}\n", n + 1);
        if let ProblemInstance::GraphColoring { task, graph, .. } = &r.problem_instance {
            b.push_str(&format!("Problem: {task}\nGraph:\n {graph}\n"));
        }
        for h in &r.interaction_history {
            b.push_str(&format!(
                "Attempt {}:\n{}\nFeedback: {}\n",
                h.attempt, h.candidate_solution, h.feedback_received
            ));
        }
        b.push_str(&format!("Solution:\n{}", r.correct_solution));
        blocks.push(b);
    }
    blocks.join("\n\n")
}

/// Fast-solver prompt: worked examples, the task, then each earlier attempt
/// with its feedback.
pub fn build_s1_prompt(inst: &GraphInstance, memory: &[MemoryRecord], history: &[HistoryItem<'_>]) -> String {
    compose_prompt(&render_memory(memory), &task_block(inst), history, None)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GcFeedback<S> {
    pub variant: FeedbackVariant,
    pub text: String,
    pub conflicts: ConflictReport<S>,
    pub adaptive_example: Option<String>,
}

impl<S> GcFeedback<S> {
    /// Feedback as sent to the solver, adaptive block included.
    pub fn full_text(&self) -> String {
        match &self.adaptive_example {
            Some(block) => format!("{}\n{}", self.text, block),
            None => self.text.clone(),
        }
    }
}

fn mlf_text<S>(report: &ConflictReport<S>) -> String {
    let mut lines = vec![format!(
        "{INCORRECT} The coloring is invalid for the following reason(s):"
    )];
    for (n, (u, v, c)) in report.conflicts.iter().enumerate() {
        lines.push(format!(
            "  {}. adjacent-conflict: vertices {u} and {v} share color {c}",
            n + 1
        ));
    }
    for v in &report.uncolored {
        lines.push(format!("  - missing-color: vertex {v} has no color"));
    }
    for (v, c) in &report.out_of_range {
        lines.push(format!(
            "  - out-of-range: vertex {v} has color {c}, outside the allowed range"
        ));
    }
    for v in &report.unknown_vertices {
        lines.push(format!("  - unknown-vertex: {v} is not a vertex of the input graph"));
    }
    lines.join("\n")
}

fn slf_text<S>(report: &ConflictReport<S>) -> String {
    let mut parts = Vec::new();
    if !report.conflicts.is_empty() {
        let pairs: Vec<String> = report.conflicts.iter().map(|(u, v, _)| format!("({u},{v})")).collect();
        parts.push(format!("adjacent-conflict(s) on pairs: {}", pairs.join(", ")));
    }
    if !report.uncolored.is_empty() {
        parts.push(format!("missing color on vertices: {}", report.uncolored.join(", ")));
    }
    if !report.out_of_range.is_empty() {
        let items: Vec<String> = report.out_of_range.iter().map(|(v, c)| format!("{v}={c}")).collect();
        parts.push(format!("out-of-range color(s): {}", items.join(", ")));
    }
    if !report.unknown_vertices.is_empty() {
        parts.push(format!("unknown vertices: {}", report.unknown_vertices.join(", ")));
    }
    format!("{INCORRECT} The coloring is invalid: {}.", parts.join("; "))
}

fn parse_failure_text() -> String {
    format!(
        "{INCORRECT} No (vertex color) pairs could be read from your answer. \
         Provide one (vertex color) pair per line, or respond exactly with: {NOT_SOLVABLE}"
    )
}

fn wrong_claim_text(k: u32) -> String {
    format!(
        "{INCORRECT} The instance is solvable with at most {k} colors. \
         Assign a color to every vertex and try again."
    )
}

/// Conflict vertices for the adaptive example: all of them, or the
/// `ADAPTIVE_MAX_VERTICES` with the highest degree inside the conflict
/// subgraph (graph order on ties).
fn adaptive_vertices<S>(inst: &GraphInstance, report: &ConflictReport<S>) -> Vec<String> {
    let vs = &report.conflict_vertices;
    if vs.len() <= ADAPTIVE_MAX_VERTICES {
        return vs.clone();
    }
    let Ok(sub) = inst.graph.induced_subgraph(vs) else {
        return Vec::new();
    };
    let deg = sub.degrees();
    let mut order: Vec<usize> = (0..sub.vertex_count()).collect();
    order.sort_by(|&a, &b| deg[b].cmp(&deg[a]).then(a.cmp(&b)));
    let keep: BTreeSet<usize> = order.into_iter().take(ADAPTIVE_MAX_VERTICES).collect();
    keep.into_iter().map(|i| sub.vertices()[i].clone()).collect()
}

/// Oracle-solved subgraph induced by the conflict vertices, or `None` when
/// there are no conflicts or the subgraph has no coloring within `k`.
pub fn adaptive_example<S>(inst: &GraphInstance, report: &ConflictReport<S>, budget: Duration) -> Option<String> {
    let vs = adaptive_vertices(inst, report);
    if vs.is_empty() {
        return None;
    }
    let sub = inst.induced_subgraph(&vs).ok()?;
    let ColorOutcome::Solution(colors) = exact_color(&sub, budget) else {
        return None;
    };
    let coloring: Vec<String> = sub
        .graph
        .vertices()
        .iter()
        .zip(colors)
        .map(|(v, c)| format!("({v} {c})"))
        .collect();
    Some(
        render(
            template::GC_ADAPTIVE,
            &[
                ("graph", &emit_dimacs_compact(&sub.graph)),
                ("coloring", &coloring.join("  ")),
            ],
        )
        .trim_end()
        .to_string(),
    )
}

/// Feedback for a scored candidate that fell short.
pub fn render_feedback<S: Scalar>(
    report: &ConflictReport<S>,
    variant: FeedbackVariant,
    include_adaptive: bool,
    inst: &GraphInstance,
    oracle_budget: Duration,
) -> GcFeedback<S> {
    let (text, adaptive) = match report.verdict {
        Verdict::ParseFailure => (parse_failure_text(), None),
        Verdict::NotSolvableClaim { .. } => (wrong_claim_text(inst.k), None),
        Verdict::Assignment => {
            let text = match variant {
                FeedbackVariant::Mlf => mlf_text(report),
                FeedbackVariant::Slf => slf_text(report),
            };
            let adaptive = if include_adaptive {
                adaptive_example(inst, report, oracle_budget)
            } else {
                None
            };
            (text, adaptive)
        }
    };
    GcFeedback {
        variant,
        text,
        conflicts: report.clone(),
        adaptive_example: adaptive,
    }
}

/// Controller plug-in for one coloring instance.
pub struct GraphColoringAdapter {
    id: String,
    inst: Arc<GraphInstance>,
    oracle_budget: Duration,
    labeled: OnceLock<Result<GraphInstance, String>>,
}

impl GraphColoringAdapter {
    pub fn new(id: impl Into<String>, inst: Arc<GraphInstance>) -> Self {
        Self {
            id: id.into(),
            inst,
            oracle_budget: Duration::from_secs(10),
            labeled: OnceLock::new(),
        }
    }

    /// Budget for adaptive examples and lazy solvability labels.
    pub fn with_oracle_budget(mut self, budget: Duration) -> Self {
        self.oracle_budget = budget;
        self
    }

    pub fn instance(&self) -> &GraphInstance {
        &self.inst
    }

    /// The instance with a solvability label, computed on first need.
    fn labeled(&self) -> Result<&GraphInstance, AdapterError> {
        if self.inst.meta.solvable.is_some() {
            return Ok(&self.inst);
        }
        self.labeled
            .get_or_init(|| label_solvability((*self.inst).clone(), self.oracle_budget).map_err(|e| e.to_string()))
            .as_ref()
            .map_err(|e| AdapterError(format!("cannot judge NOT SOLVABLE claim: {e}")))
    }
}

impl<S: Scalar> DomainAdapter<S> for GraphColoringAdapter {
    type Candidate = ColoringCandidate;
    type Evaluation = ConflictReport<S>;

    fn instance_id(&self) -> String {
        self.id.clone()
    }

    fn problem_instance(&self) -> ProblemInstance {
        problem_instance(&self.inst)
    }

    fn default_ba_rule(&self) -> BaRule {
        BaRule::Best
    }

    fn task_block(&self) -> String {
        task_block(&self.inst)
    }

    fn render_memory(&self, records: &[MemoryRecord]) -> String {
        render_memory(records)
    }

    fn parse(&self, raw: &str) -> ColoringCandidate {
        parse_coloring(raw, &self.inst)
    }

    fn evaluate(&self, cand: &ColoringCandidate) -> Result<(S, ConflictReport<S>), AdapterError> {
        let report = match score::<S>(&self.inst, cand) {
            Ok(r) => r,
            Err(_) => score::<S>(self.labeled()?, cand).map_err(|e| AdapterError(e.to_string()))?,
        };
        Ok((report.score, report))
    }

    fn feedback(&self, _cand: &ColoringCandidate, report: &ConflictReport<S>, cfg: &RunConfig) -> String {
        render_feedback(
            report,
            cfg.feedback_variant,
            cfg.adaptive_enabled(),
            &self.inst,
            self.oracle_budget,
        )
        .full_text()
    }

    fn format_reminder(&self, error: &SolverError) -> String {
        format!(
            "No answer was received ({error}). Provide one (vertex color) pair per line, \
             or respond exactly with: {NOT_SOLVABLE}"
        )
    }

    fn solution_text(&self, cand: &ColoringCandidate) -> String {
        match &cand.kind {
            CandidateKind::Assignment(map) => render_assignment(map),
            CandidateKind::NotSolvableClaim => NOT_SOLVABLE.to_string(),
            CandidateKind::ParseFailure => cand.raw_text.clone(),
        }
    }

    fn context(
        &self,
        attempt: usize,
        previous: Option<(&ColoringCandidate, &ConflictReport<S>)>,
    ) -> Option<RequestContext> {
        let (prev, named) = match previous {
            Some((cand, report)) => {
                let mut named: BTreeSet<&str> = report.conflict_vertices.iter().map(String::as_str).collect();
                named.extend(report.uncolored.iter().map(String::as_str));
                named.extend(report.out_of_range.iter().map(|(v, _)| v.as_str()));
                let ordered: Vec<String> = self
                    .inst
                    .graph
                    .vertices()
                    .iter()
                    .filter(|v| named.contains(v.as_str()))
                    .cloned()
                    .collect();
                (cand.colors().cloned(), ordered)
            }
            None => (None, Vec::new()),
        };
        Some(RequestContext::Coloring(ColoringContext {
            instance: Arc::clone(&self.inst),
            attempt,
            previous: prev,
            conflict_vertices: named,
        }))
    }
}
