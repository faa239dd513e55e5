//! Metacognitive controller: evaluate the fast solver's candidates, feed
//! back, retry, watch for stagnation and fall back to the slow solver.

mod controller;
mod prompt;

use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::memory::{MemoryRecord, MemoryVariant, ProblemInstance};
use crate::num::Scalar;
use crate::solvers::{RequestContext, SolverError};

pub use controller::{run_instance, stagnated, MemoryAccess};
pub use prompt::{
    build_fallback_prompt, build_s1_prompt, render_history_entry, select_attempt, select_best_attempt, HistoryItem,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FeedbackVariant {
    #[serde(rename = "MLF")]
    Mlf,
    #[serde(rename = "SLF")]
    Slf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FallbackVariant {
    /// Problem only.
    #[serde(rename = "PO")]
    Po,
    /// Problem plus one selected prior attempt.
    #[serde(rename = "BA")]
    Ba,
    /// Problem plus every attempt and its feedback.
    #[serde(rename = "FH")]
    Fh,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    S1Only,
    S2Only,
    Pipeline,
}

/// Which attempt a BA fallback prompt carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaRule {
    /// Highest score, latest on ties.
    Best,
    /// Most recent attempt.
    Last,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MemoryPlacement {
    All,
    FirstOnly,
    RetriesOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    #[serde(alias = "T")]
    pub max_iterations: usize,
    pub theta: f64,
    pub feedback_variant: FeedbackVariant,
    pub memory_variant: MemoryVariant,
    pub fallback_variant: FallbackVariant,
    pub stagnation_window: Option<usize>,
    pub mode: Mode,
    /// `None` picks the domain default.
    pub ba_rule: Option<BaRule>,
    /// `None` means on with MLF, off with SLF.
    pub adaptive_examples: Option<bool>,
    pub memory_limit: usize,
    pub memory_placement: MemoryPlacement,
    pub record_memory: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            max_iterations: 5,
            theta: 1.0,
            feedback_variant: FeedbackVariant::Mlf,
            memory_variant: MemoryVariant::Mem,
            fallback_variant: FallbackVariant::Po,
            stagnation_window: None,
            mode: Mode::Pipeline,
            ba_rule: None,
            adaptive_examples: None,
            memory_limit: 1,
            memory_placement: MemoryPlacement::All,
            record_memory: true,
        }
    }
}

/// Recommended stagnation window when early fallback is wanted.
pub const RECOMMENDED_STAGNATION_WINDOW: usize = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("max_iterations must be at least 1")]
    NoIterations,
    #[error("theta {0} outside [0, 1]")]
    Theta(f64),
    #[error("stagnation_window must be at least 2, got {0}")]
    Window(usize),
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.max_iterations == 0 {
            return Err(ConfigError::NoIterations);
        }
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(ConfigError::Theta(self.theta));
        }
        match self.stagnation_window {
            Some(w) if w < 2 => Err(ConfigError::Window(w)),
            _ => Ok(()),
        }
    }

    pub fn adaptive_enabled(&self) -> bool {
        self.adaptive_examples
            .unwrap_or(self.feedback_variant == FeedbackVariant::Mlf)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Attempt<S> {
    /// 1-based.
    pub index: usize,
    pub prompt: String,
    /// Raw solver output.
    pub candidate: String,
    pub score: S,
    /// Absent for the attempt that met the threshold.
    pub feedback_text: Option<String>,
    pub wall_time: Duration,
    /// Set when the solver call itself failed.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FallbackCall<S> {
    pub variant: FallbackVariant,
    pub prompt: String,
    pub reply: String,
    /// Canonical rendering of the parsed reply.
    pub candidate: String,
    pub score: S,
    pub wall_time: Duration,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transcript<S> {
    pub attempts: Vec<Attempt<S>>,
    pub fallback: Option<FallbackCall<S>>,
}

impl<S> Default for Transcript<S> {
    fn default() -> Self {
        Self {
            attempts: Vec::new(),
            fallback: None,
        }
    }
}

impl<S: Scalar> Transcript<S> {
    pub fn solver_time(&self) -> Duration {
        self.attempts.iter().map(|a| a.wall_time).sum::<Duration>()
            + self.fallback.as_ref().map_or(Duration::ZERO, |f| f.wall_time)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Status {
    SolvedByS1 {
        iteration: usize,
    },
    SolvedByS2,
    Failed {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        diagnostic: Option<String>,
    },
}

impl Status {
    pub fn is_solved(&self) -> bool {
        !matches!(self, Status::Failed { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome<S> {
    pub status: Status,
    /// Canonical text of the accepted candidate, or of the last one tried.
    pub final_candidate: Option<String>,
    /// Sum of recorded solver wall times.
    pub total_time: Duration,
    /// Wall clock around the whole run, prompt building included.
    pub elapsed: Duration,
    pub transcript: Transcript<S>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{0}")]
pub struct AdapterError(pub String);

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("fallback prompt needs at least one attempt")]
pub struct EmptyTranscript;

/// Domain plug-in used by the controller.
pub trait DomainAdapter<S: Scalar>: Sync {
    type Candidate;
    type Evaluation;

    fn instance_id(&self) -> String;

    fn problem_instance(&self) -> ProblemInstance;

    fn default_ba_rule(&self) -> BaRule;

    /// Task block shared by the first fast-solver prompt and PO prompts.
    fn task_block(&self) -> String;

    /// Closing cue placed after any history.
    fn prompt_tail(&self) -> Option<String> {
        None
    }

    fn render_memory(&self, records: &[MemoryRecord]) -> String;

    fn parse(&self, raw: &str) -> Self::Candidate;

    fn evaluate(&self, candidate: &Self::Candidate) -> Result<(S, Self::Evaluation), AdapterError>;

    fn feedback(&self, candidate: &Self::Candidate, evaluation: &Self::Evaluation, cfg: &RunConfig) -> String;

    /// Feedback for an attempt whose solver call failed.
    fn format_reminder(&self, error: &SolverError) -> String;

    /// Canonical text of a candidate, as stored in memory.
    fn solution_text(&self, candidate: &Self::Candidate) -> String;

    /// Structured context for engines that do not read prompts.
    fn context(
        &self,
        _attempt: usize,
        _previous: Option<(&Self::Candidate, &Self::Evaluation)>,
    ) -> Option<RequestContext> {
        None
    }
}
