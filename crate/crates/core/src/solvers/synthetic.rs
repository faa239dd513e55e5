//! LLM-free coloring agents for deterministic controller runs.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{Engine, EngineReply, RequestContext, SolverError, SolverRequest};
use crate::gc::render_assignment;
use crate::graph::{emit_dimacs, exact_color, ColorOutcome, GraphInstance};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticProfile {
    /// Probability that a fed-back conflict vertex gets repaired.
    pub fix_prob: f64,
    pub seed: u64,
}

fn call_rng(inst: &GraphInstance, attempt: usize, seed: u64) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update((attempt as u64).to_le_bytes());
    h.update(inst.k.to_le_bytes());
    h.update(emit_dimacs(&inst.graph).as_bytes());
    let digest = h.finalize();
    let mut bytes = [0u8; 32];
    bytes.copy_from_slice(&digest);
    ChaCha8Rng::from_seed(bytes)
}

/// One synthetic attempt.
///
/// Without a previous assignment every vertex gets a uniform color in
/// `1..=k`. Otherwise the previous assignment is kept and each vertex in
/// `conflict_vertices` is, with probability `fix_prob`, recolored to the
/// smallest color its neighbors do not currently use; when every color in
/// `1..=k` is taken it falls back to the least-conflicting one. Output uses
/// the `(vertex color)` line format.
pub fn synthetic_colorer(
    inst: &GraphInstance,
    previous: Option<&BTreeMap<String, i64>>,
    conflict_vertices: &[String],
    attempt: usize,
    profile: &SyntheticProfile,
) -> String {
    let g = &inst.graph;
    let k = inst.k as i64;
    let mut rng = call_rng(inst, attempt, profile.seed);

    let mut colors: Vec<i64> = match previous {
        None => (0..g.vertex_count()).map(|_| rng.gen_range(1..=k)).collect(),
        Some(prev) => g
            .vertices()
            .iter()
            .map(|v| prev.get(v).copied().unwrap_or_else(|| rng.gen_range(1..=k)))
            .collect(),
    };

    if previous.is_some() {
        let adj = g.adjacency();
        let targets: BTreeSet<usize> = conflict_vertices.iter().filter_map(|v| g.index_of(v)).collect();
        for v in targets {
            // Draw unconditionally so the stream does not depend on fix_prob.
            let roll: f64 = rng.gen();
            if roll >= profile.fix_prob {
                continue;
            }
            let used: BTreeSet<i64> = adj[v].iter().map(|&w| colors[w]).collect();
            colors[v] = match (1..=k).find(|c| !used.contains(c)) {
                Some(c) => c,
                None => (1..=k)
                    .min_by_key(|c| adj[v].iter().filter(|&&w| colors[w] == *c).count())
                    .unwrap_or(1),
            };
        }
    }

    let map: BTreeMap<String, i64> = g.vertices().iter().cloned().zip(colors).collect();
    render_assignment(&map)
}

pub struct SyntheticEngine {
    profile: SyntheticProfile,
}

impl SyntheticEngine {
    pub fn new(profile: SyntheticProfile) -> Result<Self, SolverError> {
        if !(0.0..=1.0).contains(&profile.fix_prob) {
            return Err(SolverError::Config(format!(
                "fix_prob {} outside [0, 1]",
                profile.fix_prob
            )));
        }
        Ok(Self { profile })
    }
}

impl Engine for SyntheticEngine {
    fn generate(&self, request: &SolverRequest<'_>) -> Result<EngineReply, SolverError> {
        let Some(RequestContext::Coloring(ctx)) = request.context else {
            return Err(SolverError::Config("synthetic colorer needs a coloring context".into()));
        };
        let text = synthetic_colorer(
            &ctx.instance,
            ctx.previous.as_ref(),
            &ctx.conflict_vertices,
            ctx.attempt,
            &self.profile,
        );
        Ok(EngineReply::from(text))
    }
}

/// Oracle answer in solver output format: a coloring or `NOT SOLVABLE`.
pub fn exact_colorer(inst: &GraphInstance, budget: Duration) -> Result<String, SolverError> {
    match exact_color(inst, budget) {
        ColorOutcome::Solution(colors) => {
            let map: BTreeMap<String, i64> = inst
                .graph
                .vertices()
                .iter()
                .cloned()
                .zip(colors.into_iter().map(i64::from))
                .collect();
            Ok(render_assignment(&map))
        }
        ColorOutcome::Unsolvable => Ok("NOT SOLVABLE".into()),
        ColorOutcome::Timeout => Err(SolverError::Timeout(budget)),
    }
}

pub struct ExactEngine {
    budget: Duration,
}

impl ExactEngine {
    pub fn new(budget: Duration) -> Self {
        Self { budget }
    }
}

impl Engine for ExactEngine {
    fn generate(&self, request: &SolverRequest<'_>) -> Result<EngineReply, SolverError> {
        let Some(RequestContext::Coloring(ctx)) = request.context else {
            return Err(SolverError::Config("exact colorer needs a coloring context".into()));
        };
        exact_colorer(&ctx.instance, self.budget).map(EngineReply::from)
    }
}
