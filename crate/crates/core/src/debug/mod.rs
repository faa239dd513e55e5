//! Code-debugging domain: instance ingestion, code extraction, sandboxed
//! test runs and failure feedback.

mod judge;

use std::fs;
use std::path::Path;
use std::sync::{Arc, OnceLock};

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::memory::{MemoryRecord, ProblemInstance};
use crate::metacog::{build_s1_prompt, AdapterError, BaRule, DomainAdapter, HistoryItem, RunConfig};
use crate::num::Scalar;
use crate::solvers::SolverError;
use crate::template::{self, render};

pub use judge::{Judge, JudgeError, Limits, LocalJudge, Runtimes};

pub const CORRECT_CODE_CUE: &str = "### Correct Code:";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LanguageTag {
    /// A `class Solution` whose single public method is called with the
    /// test input's keyword arguments (`n = 4, k = 3`); the return value is
    /// printed as JSON.
    Python3,
    /// A script reading stdin and writing stdout.
    Python3Stdin,
    /// A C++17 program reading stdin and writing stdout.
    CppStdin,
}

impl LanguageTag {
    pub fn as_str(self) -> &'static str {
        match self {
            LanguageTag::Python3 => "python3",
            LanguageTag::Python3Stdin => "python3_stdin",
            LanguageTag::CppStdin => "cpp_stdin",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestCase {
    pub input: String,
    pub expected_output: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DebugInstance {
    pub slug: String,
    pub description: String,
    pub buggy_code: String,
    pub language_tag: LanguageTag,
    pub tests: Vec<TestCase>,
}

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed instance: {0}")]
    Json(#[from] serde_json::Error),
    #[error("instance {0} has no tests")]
    NoTests(String),
}

impl DebugInstance {
    pub fn from_json(text: &str) -> Result<Self, InstanceError> {
        let inst: DebugInstance = serde_json::from_str(text)?;
        if inst.tests.is_empty() {
            return Err(InstanceError::NoTests(inst.slug));
        }
        Ok(inst)
    }

    pub fn load(path: &Path) -> Result<Self, InstanceError> {
        let text = fs::read_to_string(path).map_err(|source| InstanceError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    /// Source line count; used for memory ranking.
    pub fn size(&self) -> usize {
        self.buggy_code.lines().count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FailureKind {
    WrongOutput,
    CompileError,
    RuntimeError,
    Timeout,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailingTest {
    pub input: String,
    pub expected_output: String,
    pub actual_output: String,
    pub failure_kind: FailureKind,
    /// First compiler line, last stderr line, or the limit that was hit.
    pub diagnostic: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestRunResult {
    pub passed: usize,
    pub total: usize,
    /// The final failing test in suite order.
    pub last_failing: Option<FailingTest>,
}

impl TestRunResult {
    pub fn pass_ratio<S: Scalar>(&self) -> S {
        if self.total == 0 {
            return S::zero();
        }
        S::from_ratio(self.passed as u64, self.total as u64)
    }

    pub fn all_passed(&self) -> bool {
        self.total > 0 && self.passed == self.total
    }
}

/// Per-line trailing whitespace is ignored, as are trailing blank lines.
pub fn outputs_match(actual: &str, expected: &str) -> bool {
    fn norm(s: &str) -> Vec<&str> {
        let mut lines: Vec<&str> = s.lines().map(str::trim_end).collect();
        while lines.last() == Some(&"") {
            lines.pop();
        }
        lines
    }
    norm(actual) == norm(expected)
}

/// Runs every test with the default local judge.
pub fn run_tests(code: &str, inst: &DebugInstance, limits: &Limits) -> Result<TestRunResult, JudgeError> {
    LocalJudge::default().run(code, inst, limits)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeCandidate {
    /// `None` when no tag pair or fenced block was found.
    pub code: Option<String>,
    pub raw_text: String,
}

fn fence_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?s)```[^\n]*\n(.*?)```").expect("valid regex"))
}

fn tidy(code: &str) -> String {
    code.trim_start_matches(['\r', '\n']).trim_end().to_string()
}

/// Content of the first `<code>...</code>` pair, else of the first fenced
/// block.
pub fn parse_code(raw: &str) -> CodeCandidate {
    let tagged = raw.find("<code>").and_then(|open| {
        let body = &raw[open + "<code>".len()..];
        body.find("</code>").map(|close| tidy(&body[..close]))
    });
    let code = tagged.or_else(|| fence_regex().captures(raw).map(|c| tidy(&c[1])));
    CodeCandidate {
        code,
        raw_text: raw.to_string(),
    }
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("all tests passed; there is no failure to report")]
pub struct InvalidState;

fn reason(f: &FailingTest, limits: &Limits) -> String {
    let diag = f.diagnostic.as_deref().unwrap_or("no diagnostic");
    match f.failure_kind {
        FailureKind::WrongOutput => "Your code returned a wrong answer for this input.".to_string(),
        FailureKind::CompileError => format!("Your code failed to compile: {diag}"),
        FailureKind::RuntimeError => format!("Your code raised a runtime error: {diag}"),
        FailureKind::Timeout => format!("Your code exceeded the time limit of {} ms per test.", limits.wall_ms),
    }
}

/// The failed-test report sent back to the solver.
pub fn render_cd_feedback(result: &TestRunResult, limits: &Limits) -> Result<String, InvalidState> {
    let f = result.last_failing.as_ref().ok_or(InvalidState)?;
    let actual = if f.actual_output.is_empty() && f.failure_kind != FailureKind::WrongOutput {
        "(no output)"
    } else {
        &f.actual_output
    };
    Ok(render(
        template::CD_FEEDBACK,
        &[
            ("input", &f.input),
            ("expected", f.expected_output.trim_end()),
            ("actual", actual),
            ("reason", &reason(f, limits)),
        ],
    )
    .trim_end()
    .to_string())
}

pub fn task_block(inst: &DebugInstance) -> String {
    render(
        template::CD_TASK,
        &[
            ("description", inst.description.trim_end()),
            ("buggy_code", inst.buggy_code.trim_end()),
        ],
    )
    .trim_end()
    .to_string()
}

pub fn problem_instance(inst: &DebugInstance) -> ProblemInstance {
    ProblemInstance::CodeDebugging {
        slug: inst.slug.clone(),
        description: inst.description.clone(),
        buggy_code: inst.buggy_code.clone(),
        language_tag: inst.language_tag.as_str().to_string(),
        size: inst.size(),
    }
}

pub fn render_memory(records: &[MemoryRecord]) -> String {
    let mut blocks = Vec::new();
    for (n, r) in records.iter().enumerate() {
        let mut b = format!("### Worked Example {}\n", n + 1);
        if let ProblemInstance::CodeDebugging {
            slug,
            description,
            buggy_code,
            ..
        } = &r.problem_instance
        {
            b.push_str(&format!(
                "Problem ({slug}): {}\nBuggy code:\n{}\n",
                description.trim_end(),
                buggy_code.trim_end()
            ));
        }
        for h in &r.interaction_history {
            b.push_str(&format!(
                "Attempt {}:\n{}\nFeedback: {}\n",
                h.attempt, h.candidate_solution, h.feedback_received
            ));
        }
        b.push_str(&format!("Corrected code:\n{}", r.correct_solution));
        blocks.push(b);
    }
    blocks.join("\n\n")
}

/// Role instruction, description and buggy code, then any earlier attempts
/// with their feedback, then the completion cue.
pub fn build_cd_prompt(inst: &DebugInstance, memory: &[MemoryRecord], history: &[HistoryItem<'_>]) -> String {
    build_s1_prompt(
        &render_memory(memory),
        &task_block(inst),
        history,
        Some(CORRECT_CODE_CUE),
    )
}

const MISSING_CODE: &str = "Your answer did not contain code. You MUST return the complete, corrected code \
enclosed within <code> and </code> tags.";

pub struct CodeDebugAdapter {
    inst: Arc<DebugInstance>,
    judge: Arc<dyn Judge>,
    limits: Limits,
}

impl CodeDebugAdapter {
    pub fn new(inst: Arc<DebugInstance>) -> Self {
        Self {
            inst,
            judge: Arc::new(LocalJudge::default()),
            limits: Limits::default(),
        }
    }

    pub fn with_judge(mut self, judge: Arc<dyn Judge>) -> Self {
        self.judge = judge;
        self
    }

    pub fn with_limits(mut self, limits: Limits) -> Self {
        self.limits = limits;
        self
    }
}

impl<S: Scalar> DomainAdapter<S> for CodeDebugAdapter {
    type Candidate = CodeCandidate;
    /// `None` when no code could be extracted.
    type Evaluation = Option<TestRunResult>;

    fn instance_id(&self) -> String {
        self.inst.slug.clone()
    }

    fn problem_instance(&self) -> ProblemInstance {
        problem_instance(&self.inst)
    }

    fn default_ba_rule(&self) -> BaRule {
        BaRule::Last
    }

    fn task_block(&self) -> String {
        task_block(&self.inst)
    }

    fn prompt_tail(&self) -> Option<String> {
        Some(CORRECT_CODE_CUE.to_string())
    }

    fn render_memory(&self, records: &[MemoryRecord]) -> String {
        render_memory(records)
    }

    fn parse(&self, raw: &str) -> CodeCandidate {
        parse_code(raw)
    }

    fn evaluate(&self, cand: &CodeCandidate) -> Result<(S, Option<TestRunResult>), AdapterError> {
        let Some(code) = &cand.code else {
            return Ok((S::zero(), None));
        };
        let result = self
            .judge
            .run(code, &self.inst, &self.limits)
            .map_err(|e| AdapterError(e.to_string()))?;
        Ok((result.pass_ratio(), Some(result)))
    }

    fn feedback(&self, _cand: &CodeCandidate, eval: &Option<TestRunResult>, _cfg: &RunConfig) -> String {
        match eval {
            Some(result) => render_cd_feedback(result, &self.limits).unwrap_or_default(),
            None => MISSING_CODE.to_string(),
        }
    }

    fn format_reminder(&self, error: &SolverError) -> String {
        format!("No answer was received ({error}). {MISSING_CODE}")
    }

    fn solution_text(&self, cand: &CodeCandidate) -> String {
        cand.code.clone().unwrap_or_else(|| cand.raw_text.clone())
    }
}
