//! Scripted replay of recorded solver responses.
//!
//! A fixture is an ordered JSON array of `{prompt_key, response_text}`. A
//! call consumes the first unused entry whose key matches the prompt's task
//! section (or the wildcard `*`). Retry prompts only append history after the
//! task section, so one key serves every attempt of an instance and the
//! entries for that key play back in file order.

use std::fs;
use std::path::Path;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{Engine, EngineReply, SolverError, SolverRequest};

pub const WILDCARD_KEY: &str = "*";

const TASK_START: [&str; 2] = ["### Task:", "### Problem Description"];
const TASK_END: [&str; 3] = [
    "### Previous Attempt",
    "### Prior Partial Solution",
    "### Correct Code:",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixtureEntry {
    pub prompt_key: String,
    pub response_text: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Fixture {
    pub entries: Vec<FixtureEntry>,
}

impl Fixture {
    pub fn load(path: &Path) -> Result<Self, SolverError> {
        let text = fs::read_to_string(path)
            .map_err(|e| SolverError::Config(format!("cannot read fixture {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| SolverError::Config(format!("bad fixture {}: {e}", path.display())))
    }

    /// Entries keyed to `prompt`, one per response.
    pub fn for_prompt<S: Into<String>>(prompt: &str, responses: impl IntoIterator<Item = S>) -> Self {
        let key = prompt_key(prompt);
        Self {
            entries: responses
                .into_iter()
                .map(|r| FixtureEntry {
                    prompt_key: key.clone(),
                    response_text: r.into(),
                })
                .collect(),
        }
    }

    pub fn extend(&mut self, other: Fixture) {
        self.entries.extend(other.entries);
    }
}

/// The prompt's task block: from the first task marker up to the first
/// history or completion-tail marker.
pub fn task_section(prompt: &str) -> String {
    let lines: Vec<&str> = prompt.lines().collect();
    let start = lines
        .iter()
        .position(|l| TASK_START.iter().any(|m| l.starts_with(m)))
        .unwrap_or(0);
    let end = lines[start..]
        .iter()
        .skip(1)
        .position(|l| TASK_END.iter().any(|m| l.starts_with(m)))
        .map_or(lines.len(), |p| start + 1 + p);
    lines[start..end].join("\n").trim().to_string()
}

/// Stable key for a prompt: 16 hex chars of SHA-256 over its task section.
pub fn prompt_key(prompt: &str) -> String {
    let digest = Sha256::digest(task_section(prompt).as_bytes());
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

pub struct ReplayEngine {
    fixture: Arc<Fixture>,
    used: Mutex<Vec<bool>>,
}

impl ReplayEngine {
    pub fn new(fixture: Arc<Fixture>) -> Self {
        let used = Mutex::new(vec![false; fixture.entries.len()]);
        Self { fixture, used }
    }
}

impl Engine for ReplayEngine {
    fn generate(&self, request: &SolverRequest<'_>) -> Result<EngineReply, SolverError> {
        let key = prompt_key(request.prompt);
        let mut used = self.used.lock().expect("replay cursor poisoned");
        let hit = self
            .fixture
            .entries
            .iter()
            .enumerate()
            .find(|(i, e)| !used[*i] && (e.prompt_key == key || e.prompt_key == WILDCARD_KEY));
        match hit {
            Some((i, entry)) => {
                used[i] = true;
                Ok(EngineReply::from(entry.response_text.clone()))
            }
            None => Err(SolverError::FixtureExhausted(key)),
        }
    }
}
