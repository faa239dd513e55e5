//! The evaluate, feed back, retry and fall back loop.

use std::time::Instant;

use log::{debug, warn};

use super::{
    build_fallback_prompt, build_s1_prompt, Attempt, DomainAdapter, FallbackCall, FallbackVariant, HistoryItem,
    MemoryPlacement, Mode, Outcome, RunConfig, Status, Transcript,
};
use crate::memory::MemoryStore;
use crate::num::Scalar;
use crate::solvers::{Solver, SolverRequest};

/// Where memory is read from and written to. The two may differ, e.g. a
/// frozen snapshot for reading and a live store for recording.
#[derive(Debug, Clone, Copy, Default)]
pub struct MemoryAccess<'a> {
    pub recall: Option<&'a MemoryStore>,
    pub record: Option<&'a MemoryStore>,
}

impl<'a> MemoryAccess<'a> {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn shared(store: &'a MemoryStore) -> Self {
        Self {
            recall: Some(store),
            record: Some(store),
        }
    }
}

/// True when none of the last `window - 1` scores strictly beat the best
/// score seen before them.
pub fn stagnated<S: Scalar>(scores: &[S], window: usize) -> bool {
    if window < 2 || scores.len() < window {
        return false;
    }
    let split = scores.len() - (window - 1);
    let Some(best) = scores[..split].iter().copied().reduce(|a, b| if b > a { b } else { a }) else {
        return false;
    };
    scores[split..].iter().all(|s| *s <= best)
}

fn threshold<S: Scalar>(theta: f64) -> S {
    if theta >= 1.0 {
        S::one()
    } else {
        S::from_f64(theta).unwrap_or_else(S::one)
    }
}

fn failed(diagnostic: impl Into<String>) -> Status {
    Status::Failed {
        diagnostic: Some(diagnostic.into()),
    }
}

/// Runs one problem instance to completion.
pub fn run_instance<S, A>(
    adapter: &A,
    s1: &Solver,
    s2: &Solver,
    cfg: &RunConfig,
    memory: MemoryAccess<'_>,
) -> Outcome<S>
where
    S: Scalar,
    A: DomainAdapter<S> + ?Sized,
{
    let start = Instant::now();
    let mut transcript = Transcript::default();
    let mut final_candidate = None;

    let finish = |status: Status, final_candidate: Option<String>, transcript: Transcript<S>| {
        let outcome = Outcome {
            total_time: transcript.solver_time(),
            elapsed: start.elapsed(),
            status,
            final_candidate,
            transcript,
        };
        if outcome.status.is_solved() && cfg.record_memory {
            if let Some(store) = memory.record {
                if let Err(e) = store.record_success(adapter.problem_instance(), &outcome, cfg.memory_variant) {
                    warn!("{}: memory not recorded: {e}", adapter.instance_id());
                }
            }
        }
        outcome
    };

    if let Err(e) = cfg.validate() {
        return finish(failed(e.to_string()), None, transcript);
    }
    let theta = threshold::<S>(cfg.theta);
    let rule = cfg.ba_rule.unwrap_or_else(|| adapter.default_ba_rule());

    if cfg.mode != Mode::S2Only {
        let memory_text = match memory.recall {
            Some(store) if cfg.memory_limit > 0 => {
                adapter.render_memory(&store.retrieve(&adapter.problem_instance(), cfg.memory_limit))
            }
            _ => String::new(),
        };
        let task = adapter.task_block();
        let tail = adapter.prompt_tail();
        let mut previous: Option<(A::Candidate, A::Evaluation)> = None;

        for t in 1..=cfg.max_iterations {
            let use_memory = match cfg.memory_placement {
                MemoryPlacement::All => true,
                MemoryPlacement::FirstOnly => t == 1,
                MemoryPlacement::RetriesOnly => t > 1,
            };
            let history: Vec<HistoryItem<'_>> = transcript.attempts.iter().map(HistoryItem::from).collect();
            let prompt = build_s1_prompt(
                if use_memory { &memory_text } else { "" },
                &task,
                &history,
                tail.as_deref(),
            );
            let context = adapter.context(t, previous.as_ref().map(|(c, e)| (c, e)));
            let request = SolverRequest {
                prompt: &prompt,
                context: context.as_ref(),
            };
            match s1.complete(&request) {
                Err(failure) => {
                    debug!("{} attempt {t}: solver error {}", adapter.instance_id(), failure.error);
                    transcript.attempts.push(Attempt {
                        index: t,
                        prompt,
                        candidate: String::new(),
                        score: S::zero(),
                        feedback_text: Some(adapter.format_reminder(&failure.error)),
                        wall_time: failure.wall_time,
                        error: Some(failure.error.to_string()),
                    });
                }
                Ok(reply) => {
                    let cand = adapter.parse(&reply.text);
                    let (score, eval) = match adapter.evaluate(&cand) {
                        Ok(v) => v,
                        Err(e) => return finish(failed(e.to_string()), final_candidate, transcript),
                    };
                    final_candidate = Some(adapter.solution_text(&cand));
                    let solved = score >= theta;
                    transcript.attempts.push(Attempt {
                        index: t,
                        prompt,
                        candidate: reply.text,
                        score,
                        feedback_text: (!solved).then(|| adapter.feedback(&cand, &eval, cfg)),
                        wall_time: reply.wall_time,
                        error: None,
                    });
                    if solved {
                        return finish(Status::SolvedByS1 { iteration: t }, final_candidate, transcript);
                    }
                    previous = Some((cand, eval));
                }
            }
            if let Some(w) = cfg.stagnation_window {
                let scores: Vec<S> = transcript.attempts.iter().map(|a| a.score).collect();
                if t < cfg.max_iterations && stagnated(&scores, w) {
                    debug!("{}: stagnation after attempt {t}", adapter.instance_id());
                    break;
                }
            }
        }
        if cfg.mode == Mode::S1Only {
            return finish(Status::Failed { diagnostic: None }, final_candidate, transcript);
        }
    }

    let variant = if transcript.attempts.is_empty() {
        FallbackVariant::Po
    } else {
        cfg.fallback_variant
    };
    let prompt = match build_fallback_prompt(adapter, variant, rule, &transcript) {
        Ok(p) => p,
        Err(e) => return finish(failed(e.to_string()), final_candidate, transcript),
    };
    let context = adapter.context(transcript.attempts.len() + 1, None);
    let request = SolverRequest {
        prompt: &prompt,
        context: context.as_ref(),
    };
    match s2.complete(&request) {
        Err(failure) => {
            transcript.fallback = Some(FallbackCall {
                variant,
                prompt,
                reply: String::new(),
                candidate: String::new(),
                score: S::zero(),
                wall_time: failure.wall_time,
                error: Some(failure.error.to_string()),
            });
            finish(Status::Failed { diagnostic: None }, final_candidate, transcript)
        }
        Ok(reply) => {
            let cand = adapter.parse(&reply.text);
            let (score, _) = match adapter.evaluate(&cand) {
                Ok(v) => v,
                Err(e) => return finish(failed(e.to_string()), final_candidate, transcript),
            };
            let text = adapter.solution_text(&cand);
            transcript.fallback = Some(FallbackCall {
                variant,
                prompt,
                reply: reply.text,
                candidate: text.clone(),
                score,
                wall_time: reply.wall_time,
                error: None,
            });
            let status = if score >= theta {
                Status::SolvedByS2
            } else {
                Status::Failed { diagnostic: None }
            };
            finish(status, Some(text), transcript)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stagnation_window() {
        assert!(!stagnated(&[0.5, 0.5], 3));
        assert!(stagnated(&[0.5, 0.5, 0.5], 3));
        assert!(!stagnated(&[0.5, 0.4, 0.6], 3));
        assert!(stagnated(&[0.5, 0.6, 0.6, 0.6], 3));
        assert!(stagnated(&[0.7, 0.3], 2));
        assert!(!stagnated(&[0.3, 0.7], 2));
        assert!(!stagnated(&[0.1, 0.1, 0.1], 1));
    }
}
