//! Prompt composition for fast-solver retries and slow-solver fallbacks.

use super::{Attempt, BaRule, DomainAdapter, EmptyTranscript, FallbackVariant, Transcript};
use crate::num::Scalar;

/// An earlier attempt as shown to the solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HistoryItem<'a> {
    pub index: usize,
    pub candidate: &'a str,
    pub feedback: &'a str,
}

impl<'a, S> From<&'a Attempt<S>> for HistoryItem<'a> {
    fn from(a: &'a Attempt<S>) -> Self {
        Self {
            index: a.index,
            candidate: &a.candidate,
            feedback: a.feedback_text.as_deref().unwrap_or(""),
        }
    }
}

pub fn render_history_entry(item: &HistoryItem<'_>) -> String {
    format!(
        "### Previous Attempt {}\n{}\n### Feedback\n{}",
        item.index, item.candidate, item.feedback
    )
}

/// Memory block, task block, history, then the closing cue. Empty parts
/// are skipped; parts are separated by a blank line.
pub fn build_s1_prompt(memory: &str, task: &str, history: &[HistoryItem<'_>], tail: Option<&str>) -> String {
    let mut parts: Vec<String> = Vec::new();
    if !memory.is_empty() {
        parts.push(memory.to_string());
    }
    parts.push(task.to_string());
    parts.extend(history.iter().map(render_history_entry));
    if let Some(t) = tail {
        parts.push(t.to_string());
    }
    parts.join("\n\n")
}

/// Highest score, latest attempt on ties.
pub fn select_best_attempt<S: Scalar>(attempts: &[Attempt<S>]) -> Result<&Attempt<S>, EmptyTranscript> {
    let mut best: Option<&Attempt<S>> = None;
    for a in attempts {
        if best.is_none_or(|b| a.score >= b.score) {
            best = Some(a);
        }
    }
    best.ok_or(EmptyTranscript)
}

pub fn select_attempt<S: Scalar>(attempts: &[Attempt<S>], rule: BaRule) -> Result<&Attempt<S>, EmptyTranscript> {
    match rule {
        BaRule::Best => select_best_attempt(attempts),
        BaRule::Last => attempts.last().ok_or(EmptyTranscript),
    }
}

/// Slow-solver prompt. PO is the first fast-solver prompt without memory;
/// BA adds one prior attempt chosen by `rule`; FH adds every attempt with
/// its feedback.
pub fn build_fallback_prompt<S: Scalar, A: DomainAdapter<S> + ?Sized>(
    adapter: &A,
    variant: FallbackVariant,
    rule: BaRule,
    transcript: &Transcript<S>,
) -> Result<String, EmptyTranscript> {
    let task = adapter.task_block();
    let tail = adapter.prompt_tail();
    let mut parts = vec![task];
    match variant {
        FallbackVariant::Po => {}
        FallbackVariant::Ba => {
            let a = select_attempt(&transcript.attempts, rule)?;
            parts.push(format!(
                "### Prior Partial Solution (attempt {}, score {:.4})\n{}",
                a.index,
                a.score.to_f64(),
                a.candidate
            ));
        }
        FallbackVariant::Fh => {
            if transcript.attempts.is_empty() {
                return Err(EmptyTranscript);
            }
            parts.extend(transcript.attempts.iter().map(|a| render_history_entry(&a.into())));
        }
    }
    parts.extend(tail);
    Ok(parts.join("\n\n"))
}
