//! Episodic memory of solved instances.
//!
//! Two record shapes share one JSON layout: minimal records hold only
//! `problem_instance` and `correct_solution`; extended records add the
//! `interaction_history` of every attempt and the feedback it received.
//! Records persist as append-only JSON lines, one file per domain.

use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metacog::{Outcome, Status};
use crate::num::Scalar;

/// Feedback text stored on the final, successful history entry.
pub const SUCCESS_MARKER: &str = "Correct";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    GraphColoring,
    CodeDebugging,
}

impl Domain {
    pub const ALL: [Domain; 2] = [Domain::GraphColoring, Domain::CodeDebugging];

    pub fn file_stem(self) -> &'static str {
        match self {
            Domain::GraphColoring => "graph_coloring",
            Domain::CodeDebugging => "code_debugging",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MemoryVariant {
    #[serde(rename = "MEM")]
    Mem,
    #[serde(rename = "EEM")]
    Eem,
}

/// Domain-tagged problem as stored in memory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "domain", rename_all = "snake_case")]
pub enum ProblemInstance {
    GraphColoring {
        task: String,
        graph: String,
        k: u32,
        size: usize,
    },
    CodeDebugging {
        slug: String,
        description: String,
        buggy_code: String,
        language_tag: String,
        size: usize,
    },
}

impl ProblemInstance {
    pub fn domain(&self) -> Domain {
        match self {
            ProblemInstance::GraphColoring { .. } => Domain::GraphColoring,
            ProblemInstance::CodeDebugging { .. } => Domain::CodeDebugging,
        }
    }

    /// Vertex count or source line count; drives retrieval ranking.
    pub fn size(&self) -> usize {
        match self {
            ProblemInstance::GraphColoring { size, .. } | ProblemInstance::CodeDebugging { size, .. } => *size,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub attempt: usize,
    pub candidate_solution: String,
    pub feedback_received: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemoryRecord {
    pub problem_instance: ProblemInstance,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub interaction_history: Vec<HistoryEntry>,
    pub correct_solution: String,
}

impl MemoryRecord {
    pub fn variant(&self) -> MemoryVariant {
        if self.interaction_history.is_empty() {
            MemoryVariant::Mem
        } else {
            MemoryVariant::Eem
        }
    }

    /// Builds a record from a solved outcome. Extended records list every
    /// solver call, the fallback included, ending with [`SUCCESS_MARKER`].
    pub fn from_outcome<S: Scalar>(
        problem: ProblemInstance,
        outcome: &Outcome<S>,
        variant: MemoryVariant,
    ) -> Result<Self, MemoryError> {
        if !outcome.status.is_solved() {
            return Err(MemoryError::NotSolved);
        }
        let correct_solution = outcome.final_candidate.clone().ok_or(MemoryError::NotSolved)?;
        let mut interaction_history = Vec::new();
        if variant == MemoryVariant::Eem {
            let t = &outcome.transcript;
            for a in &t.attempts {
                interaction_history.push(HistoryEntry {
                    attempt: a.index,
                    candidate_solution: a.candidate.clone(),
                    feedback_received: a.feedback_text.clone().unwrap_or_else(|| SUCCESS_MARKER.to_string()),
                });
            }
            if let (Some(f), Status::SolvedByS2) = (&t.fallback, &outcome.status) {
                interaction_history.push(HistoryEntry {
                    attempt: t.attempts.len() + 1,
                    candidate_solution: f.reply.clone(),
                    feedback_received: SUCCESS_MARKER.to_string(),
                });
            }
        }
        Ok(Self {
            problem_instance: problem,
            interaction_history,
            correct_solution,
        })
    }
}

#[derive(Debug, Error)]
pub enum MemoryError {
    #[error("outcome is not solved; nothing to remember")]
    NotSolved,
    #[error("memory persistence failed at {path}: {source}")]
    Persistence {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("corrupt memory record in {path} line {line}: {source}")]
    Corrupt {
        path: PathBuf,
        line: usize,
        #[source]
        source: serde_json::Error,
    },
}

/// In-process view over the persisted records. Writes are serialized; reads
/// clone a snapshot.
#[derive(Debug, Default)]
pub struct MemoryStore {
    dir: Option<PathBuf>,
    records: RwLock<Vec<MemoryRecord>>,
    writer: Mutex<()>,
}

impl MemoryStore {
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Opens (creating if needed) a store directory and loads its records.
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, MemoryError> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|source| MemoryError::Persistence {
            path: dir.clone(),
            source,
        })?;
        let mut records = Vec::new();
        for domain in Domain::ALL {
            let path = dir.join(format!("{}.jsonl", domain.file_stem()));
            if path.exists() {
                records.extend(load_jsonl(&path)?);
            }
        }
        Ok(Self {
            dir: Some(dir),
            records: RwLock::new(records),
            writer: Mutex::new(()),
        })
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    pub fn len(&self) -> usize {
        self.records.read().expect("memory lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn snapshot(&self) -> Vec<MemoryRecord> {
        self.records.read().expect("memory lock").clone()
    }

    /// Appends and persists one record.
    pub fn append(&self, record: MemoryRecord) -> Result<(), MemoryError> {
        let _guard = self.writer.lock().expect("memory writer");
        if let Some(dir) = &self.dir {
            let path = dir.join(format!("{}.jsonl", record.problem_instance.domain().file_stem()));
            let line = serde_json::to_string(&record).expect("memory records serialize");
            let io = |source| MemoryError::Persistence {
                path: path.clone(),
                source,
            };
            let mut file = OpenOptions::new().create(true).append(true).open(&path).map_err(io)?;
            writeln!(file, "{line}").map_err(io)?;
        }
        self.records.write().expect("memory lock").push(record);
        Ok(())
    }

    pub fn record_success<S: Scalar>(
        &self,
        problem: ProblemInstance,
        outcome: &Outcome<S>,
        variant: MemoryVariant,
    ) -> Result<MemoryRecord, MemoryError> {
        let record = MemoryRecord::from_outcome(problem, outcome, variant)?;
        self.append(record.clone())?;
        Ok(record)
    }

    pub fn retrieve(&self, query: &ProblemInstance, limit: usize) -> Vec<MemoryRecord> {
        retrieve(&self.records.read().expect("memory lock"), query, limit)
    }
}

/// Same-domain records ranked by `|size - query size|`, newest first on
/// ties. `records` is in insertion order.
pub fn retrieve(records: &[MemoryRecord], query: &ProblemInstance, limit: usize) -> Vec<MemoryRecord> {
    let domain = query.domain();
    let size = query.size();
    let mut ranked: Vec<(usize, usize)> = records
        .iter()
        .enumerate()
        .filter(|(_, r)| r.problem_instance.domain() == domain)
        .map(|(i, r)| (r.problem_instance.size().abs_diff(size), i))
        .collect();
    ranked.sort_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)));
    ranked
        .into_iter()
        .take(limit)
        .map(|(_, i)| records[i].clone())
        .collect()
}

fn load_jsonl(path: &Path) -> Result<Vec<MemoryRecord>, MemoryError> {
    let file = File::open(path).map_err(|source| MemoryError::Persistence {
        path: path.to_path_buf(),
        source,
    })?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|source| MemoryError::Persistence {
            path: path.to_path_buf(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line).map_err(|source| MemoryError::Corrupt {
            path: path.to_path_buf(),
            line: i + 1,
            source,
        })?;
        out.push(record);
    }
    Ok(out)
}
