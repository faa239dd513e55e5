#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use fastslow_core::graph::{parse_dimacs, GraphInstance};
use fastslow_core::memory::{MemoryRecord, ProblemInstance};
use fastslow_core::metacog::{AdapterError, BaRule, DomainAdapter, RunConfig};
use fastslow_core::solvers::{Backend, EngineReply, Solver, SolverError, SolverRequest, SolverSpec};
use fastslow_core::Exact;

pub const ATTEMPT_1: &str = "(a 1)  (b 2)  (c 2)  (d 1)  (e 1)\n(f 3)  (g 2)  (h 3)  (i 3)  (j 3)";
pub const ATTEMPT_2_WRONG: &str = "(a 2)  (b 1)  (c 2)  (d 3)  (e 4)\n(f 1)  (g 2)  (h 1)  (i 2)  (j 3)";
pub const ATTEMPT_2_RIGHT: &str = "(a 1)  (b 2)  (c 3)  (d 1)  (e 3)\n(f 1)  (g 2)  (h 2)  (i 4)  (j 1)";

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn walkthrough() -> GraphInstance {
    let text = std::fs::read_to_string(fixture("walkthrough.dimacs")).unwrap();
    GraphInstance::new(parse_dimacs(&text).unwrap(), 4)
}

pub fn replay(name: &str) -> Solver {
    SolverSpec::new(Backend::ScriptedReplay { fixture: fixture(name) })
        .with_simulated_latency(10)
        .instantiate()
        .unwrap()
}

/// Every assignment in `1..=k`, vertex-indexed; `None` if none is proper.
pub fn brute_force_coloring(n: usize, edges: &[(usize, usize)], k: u32) -> Option<Vec<u32>> {
    let total = (k as u64).checked_pow(n as u32).expect("search space fits u64");
    let mut colors = vec![0u32; n];
    for code in 0..total {
        let mut c = code;
        for slot in colors.iter_mut() {
            *slot = (c % k as u64) as u32 + 1;
            c /= k as u64;
        }
        if edges.iter().all(|&(u, v)| colors[u] != colors[v]) {
            return Some(colors);
        }
    }
    None
}

/// Edge-by-edge recount: satisfied edges over edges plus isolated
/// vertices lacking a color in `1..=k`. An edge is satisfied only when both
/// ends carry distinct colors in `1..=k`.
pub fn recount_score(inst: &GraphInstance, colors: &BTreeMap<String, i64>) -> Exact {
    let k = inst.k as i64;
    let ok = |v: &str| colors.get(v).filter(|&&c| c >= 1 && c <= k).copied();
    let edges: Vec<(&str, &str)> = inst.graph.edges().collect();
    let satisfied = edges
        .iter()
        .filter(|(u, v)| matches!((ok(u), ok(v)), (Some(a), Some(b)) if a != b))
        .count() as i64;
    let bad_isolated = inst
        .graph
        .vertices()
        .iter()
        .filter(|v| !edges.iter().any(|(a, b)| a == v || b == v) && ok(v).is_none())
        .count() as i64;
    let denom = edges.len() as i64 + bad_isolated;
    if denom == 0 {
        Exact::from_integer(1)
    } else {
        Exact::new(satisfied, denom)
    }
}

pub fn shared<T>(t: T) -> Arc<T> {
    Arc::new(t)
}

/// Replies served in order; each call takes the next one.
pub fn scripted(replies: Vec<Result<String, SolverError>>) -> Solver {
    let cursor = AtomicUsize::new(0);
    let engine = move |_: &SolverRequest<'_>| {
        let i = cursor.fetch_add(1, Ordering::SeqCst);
        replies
            .get(i)
            .cloned()
            .unwrap_or_else(|| Err(SolverError::FixtureExhausted(format!("call {i}"))))
            .map(EngineReply::from)
    };
    SolverSpec::new(Backend::ScriptedReplay {
        fixture: PathBuf::new(),
    })
    .with_simulated_latency(5)
    .wrap(Box::new(engine))
}

/// Delegates to `inner` and counts calls.
pub fn counted(inner: Solver, calls: Arc<AtomicUsize>) -> Solver {
    let engine = move |req: &SolverRequest<'_>| {
        calls.fetch_add(1, Ordering::SeqCst);
        inner
            .complete(req)
            .map(|r| EngineReply::from(r.text))
            .map_err(|f| f.error)
    };
    SolverSpec::new(Backend::ScriptedReplay {
        fixture: PathBuf::new(),
    })
    .with_simulated_latency(1)
    .wrap(Box::new(engine))
}

/// Candidates are free text ending in `score=P/Q`; anything else scores 0.
pub struct ScoreAdapter {
    pub id: String,
}

impl ScoreAdapter {
    pub fn new(id: impl Into<String>) -> Self {
        Self { id: id.into() }
    }
}

pub fn score_of(text: &str) -> Exact {
    text.rsplit_once("score=")
        .and_then(|(_, s)| s.trim().parse::<Exact>().ok())
        .unwrap_or_else(|| Exact::from_integer(0))
}

impl DomainAdapter<Exact> for ScoreAdapter {
    type Candidate = String;
    type Evaluation = ();

    fn instance_id(&self) -> String {
        self.id.clone()
    }

    fn problem_instance(&self) -> ProblemInstance {
        ProblemInstance::GraphColoring {
            task: "score".into(),
            graph: self.id.clone(),
            k: 1,
            size: 1,
        }
    }

    fn default_ba_rule(&self) -> BaRule {
        BaRule::Best
    }

    fn task_block(&self) -> String {
        format!("### Task\nReach a perfect score on {}.", self.id)
    }

    fn render_memory(&self, records: &[MemoryRecord]) -> String {
        records
            .iter()
            .map(|r| r.correct_solution.as_str())
            .collect::<Vec<_>>()
            .join("\n")
    }

    fn parse(&self, raw: &str) -> String {
        raw.to_string()
    }

    fn evaluate(&self, c: &String) -> Result<(Exact, ()), AdapterError> {
        Ok((score_of(c), ()))
    }

    fn feedback(&self, c: &String, _: &(), _: &RunConfig) -> String {
        format!("Scored {} only.", score_of(c))
    }

    fn format_reminder(&self, error: &SolverError) -> String {
        format!("No answer ({error}).")
    }

    fn solution_text(&self, c: &String) -> String {
        c.clone()
    }
}
