//! Configuration sweeps over a dataset.

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use log::{debug, info};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dataset::{Dataset, DatasetItem};
use super::report::{aggregate, write_csv, LabelFilter, ReportRow};
use super::{io_err, HarnessError};
use crate::debug::{CodeDebugAdapter, Limits, LocalJudge, Runtimes};
use crate::gc::GraphColoringAdapter;
use crate::memory::MemoryStore;
use crate::metacog::{run_instance, FallbackVariant, MemoryAccess, Mode, Outcome, RunConfig, Status};
use crate::num::Scalar;
use crate::solvers::{Backend, Solver, SolverSpec};
use crate::Exact;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MemoryMode {
    Off,
    /// Each configuration starts empty and learns as it goes. Runs on one
    /// worker since later instances read what earlier ones wrote.
    #[default]
    Online,
    /// Reads a frozen store loaded from `memory_seed`; new successes are
    /// recorded but never read back during the sweep.
    Snapshot,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    pub label: String,
    #[serde(flatten)]
    pub run: RunConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s1: Option<SolverSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s2: Option<SolverSpec>,
}

fn default_workers() -> usize {
    1
}

fn default_oracle_budget_ms() -> u64 {
    10_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub dataset: PathBuf,
    pub output: PathBuf,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default)]
    pub memory: MemoryMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub memory_seed: Option<PathBuf>,
    /// Instance filter applied before running.
    #[serde(default)]
    pub filter: LabelFilter,
    #[serde(default = "default_oracle_budget_ms")]
    pub oracle_budget_ms: u64,
    #[serde(default)]
    pub limits: Limits,
    #[serde(default)]
    pub runtimes: Runtimes,
    pub configurations: Vec<Configuration>,
}

/// File-name form of a label.
pub fn label_slug(label: &str) -> String {
    label
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

impl SweepSpec {
    /// Parses a TOML spec; relative paths resolve against its directory.
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        let mut spec: SweepSpec = toml::from_str(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut spec.dataset);
        fix(&mut spec.output);
        if let Some(m) = spec.memory_seed.as_mut() {
            fix(m);
        }
        for c in &mut spec.configurations {
            for s in [c.s1.as_mut(), c.s2.as_mut()].into_iter().flatten() {
                if let Backend::ScriptedReplay { fixture } = &mut s.backend {
                    fix(fixture);
                }
            }
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.workers == 0 {
            return Err(HarnessError::Spec("workers must be at least 1".into()));
        }
        if self.configurations.is_empty() {
            return Err(HarnessError::Spec("no configurations".into()));
        }
        let mut labels = BTreeSet::new();
        let mut slugs = BTreeSet::new();
        for c in &self.configurations {
            if !labels.insert(c.label.as_str()) || !slugs.insert(label_slug(&c.label)) {
                return Err(HarnessError::Spec(format!("duplicate label {}", c.label)));
            }
            c.run
                .validate()
                .map_err(|e| HarnessError::Spec(format!("{}: {e}", c.label)))?;
            if c.run.mode != Mode::S2Only && c.s1.is_none() {
                return Err(HarnessError::Spec(format!("{}: s1 solver required", c.label)));
            }
            if c.run.mode != Mode::S1Only && c.s2.is_none() {
                return Err(HarnessError::Spec(format!("{}: s2 solver required", c.label)));
            }
        }
        if self.memory == MemoryMode::Snapshot && self.memory_seed.is_none() {
            return Err(HarnessError::Spec("snapshot memory needs memory_seed".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttemptRecord {
    pub index: usize,
    pub prompt: String,
    pub candidate: String,
    pub score: f64,
    pub feedback_text: Option<String>,
    pub wall_time_ms: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FallbackRecord {
    pub variant: FallbackVariant,
    pub prompt: String,
    pub reply: String,
    pub candidate: String,
    pub score: f64,
    pub wall_time_ms: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// One JSON line per instance and configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptRecord {
    pub instance_id: String,
    pub size: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solvable: Option<bool>,
    pub config: Configuration,
    pub attempts: Vec<AttemptRecord>,
    pub fallback: Option<FallbackRecord>,
    pub status: Status,
    pub final_candidate: Option<String>,
    pub total_time_ms: f64,
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

impl TranscriptRecord {
    pub fn from_outcome<S: Scalar>(item: &DatasetItem, config: &Configuration, outcome: &Outcome<S>) -> Self {
        let t = &outcome.transcript;
        Self {
            instance_id: item.id().to_string(),
            size: item.size(),
            solvable: item.solvable(),
            config: config.clone(),
            attempts: t
                .attempts
                .iter()
                .map(|a| AttemptRecord {
                    index: a.index,
                    prompt: a.prompt.clone(),
                    candidate: a.candidate.clone(),
                    score: a.score.to_f64(),
                    feedback_text: a.feedback_text.clone(),
                    wall_time_ms: ms(a.wall_time),
                    error: a.error.clone(),
                })
                .collect(),
            fallback: t.fallback.as_ref().map(|f| FallbackRecord {
                variant: f.variant,
                prompt: f.prompt.clone(),
                reply: f.reply.clone(),
                candidate: f.candidate.clone(),
                score: f.score.to_f64(),
                wall_time_ms: ms(f.wall_time),
                error: f.error.clone(),
            }),
            status: outcome.status.clone(),
            final_candidate: outcome.final_candidate.clone(),
            total_time_ms: ms(outcome.total_time),
        }
    }

    /// Record for an instance that could not be run at all.
    fn setup_failure(item: &DatasetItem, config: &Configuration, diagnostic: String) -> Self {
        Self {
            instance_id: item.id().to_string(),
            size: item.size(),
            solvable: item.solvable(),
            config: config.clone(),
            attempts: Vec::new(),
            fallback: None,
            status: Status::Failed {
                diagnostic: Some(diagnostic),
            },
            final_candidate: None,
            total_time_ms: 0.0,
        }
    }
}

struct Context<'a> {
    spec: &'a SweepSpec,
    config: &'a Configuration,
    memory: MemoryAccess<'a>,
}

fn instantiate(spec: Option<&SolverSpec>) -> Result<Solver, String> {
    match spec {
        Some(s) => s.instantiate().map_err(|e| e.to_string()),
        // Never called: validation guarantees a spec for every slot the mode uses.
        None => Ok(Solver::from_engine(|_: &crate::solvers::SolverRequest<'_>| {
            Err(crate::solvers::SolverError::Config("no solver configured".into()))
        })),
    }
}

fn run_item(ctx: &Context<'_>, item: &DatasetItem) -> TranscriptRecord {
    let solvers = instantiate(ctx.config.s1.as_ref()).and_then(|s1| Ok((s1, instantiate(ctx.config.s2.as_ref())?)));
    let (s1, s2) = match solvers {
        Ok(pair) => pair,
        Err(e) => return TranscriptRecord::setup_failure(item, ctx.config, e),
    };
    let cfg = &ctx.config.run;
    let outcome: Outcome<Exact> = match item {
        DatasetItem::Coloring { id, instance } => {
            let adapter = GraphColoringAdapter::new(id.clone(), Arc::new(instance.clone()))
                .with_oracle_budget(Duration::from_millis(ctx.spec.oracle_budget_ms));
            run_instance(&adapter, &s1, &s2, cfg, ctx.memory)
        }
        DatasetItem::Debugging { instance, .. } => {
            let judge = LocalJudge {
                runtimes: ctx.spec.runtimes.clone(),
            };
            let adapter = CodeDebugAdapter::new(Arc::new(instance.clone()))
                .with_judge(Arc::new(judge))
                .with_limits(ctx.spec.limits);
            run_instance(&adapter, &s1, &s2, cfg, ctx.memory)
        }
    };
    debug!(
        "{} {}: {:?} in {:?}",
        ctx.config.label,
        item.id(),
        outcome.status,
        outcome.elapsed
    );
    TranscriptRecord::from_outcome(item, ctx.config, &outcome)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub rows: Vec<ReportRow>,
    pub transcripts: Vec<PathBuf>,
    pub csv: PathBuf,
}

fn write_jsonl(path: &Path, records: &[TranscriptRecord]) -> Result<(), HarnessError> {
    let mut out = Vec::new();
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.push(b'\n');
    }
    let mut f = fs::File::create(path).map_err(io_err(path))?;
    f.write_all(&out).map_err(io_err(path))
}

/// Runs every configuration over the dataset and writes
/// `transcripts/<label>.jsonl`, `report.csv` and, with memory on,
/// `memory/<label>/`. Existing outputs for the same labels are replaced.
pub fn cmd_run(spec: &SweepSpec) -> Result<RunSummary, HarnessError> {
    spec.validate()?;
    let dataset = Dataset::load(&spec.dataset)?;
    let items: Vec<&DatasetItem> = dataset
        .items
        .iter()
        .filter(|i| spec.filter.keeps(i.solvable()))
        .collect();
    let tdir = spec.output.join("transcripts");
    fs::create_dir_all(&tdir).map_err(io_err(&tdir))?;

    let seed_store = match (&spec.memory, &spec.memory_seed) {
        (MemoryMode::Snapshot, Some(dir)) => Some(MemoryStore::open(dir)?),
        _ => None,
    };
    let frozen = seed_store.map(|s| {
        let store = MemoryStore::in_memory();
        for r in s.snapshot() {
            store.append(r).expect("in-memory append");
        }
        store
    });

    let mut rows = Vec::new();
    let mut transcripts = Vec::new();
    for config in &spec.configurations {
        let slug = label_slug(&config.label);
        let store = if spec.memory == MemoryMode::Off {
            None
        } else {
            let dir = spec.output.join("memory").join(&slug);
            if dir.exists() {
                fs::remove_dir_all(&dir).map_err(io_err(&dir))?;
            }
            Some(MemoryStore::open(&dir)?)
        };
        let memory = match spec.memory {
            MemoryMode::Off => MemoryAccess::none(),
            MemoryMode::Online => MemoryAccess {
                recall: store.as_ref(),
                record: store.as_ref(),
            },
            MemoryMode::Snapshot => MemoryAccess {
                recall: frozen.as_ref(),
                record: store.as_ref(),
            },
        };
        let workers = if spec.memory == MemoryMode::Online {
            1
        } else {
            spec.workers
        };
        let ctx = Context { spec, config, memory };
        info!("{}: {} instances on {workers} worker(s)", config.label, items.len());
        let records: Vec<TranscriptRecord> = if workers == 1 {
            items.iter().map(|i| run_item(&ctx, i)).collect()
        } else {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(workers)
                .build()
                .map_err(|e| HarnessError::Spec(e.to_string()))?;
            pool.install(|| items.par_iter().map(|i| run_item(&ctx, i)).collect())
        };
        let path = tdir.join(format!("{slug}.jsonl"));
        write_jsonl(&path, &records)?;
        rows.push(aggregate(&config.label, &records, LabelFilter::All));
        transcripts.push(path);
    }
    let csv = spec.output.join("report.csv");
    write_csv(&csv, &rows)?;
    Ok(RunSummary { rows, transcripts, csv })
}
