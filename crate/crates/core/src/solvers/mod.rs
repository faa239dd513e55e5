//! Solver abstraction shared by the fast and slow slots.
//!
//! A [`SolverSpec`] is the serializable description (backend, decoding
//! options, timeouts); [`SolverSpec::instantiate`] turns it into a [`Solver`]
//! that can be called. Every call is timed. Failures carry the time they
//! consumed so the controller can charge them to the attempt.

mod http;
mod replay;
mod synthetic;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::GraphInstance;

pub use http::{HttpEndpoint, HttpEngine};
pub use replay::{prompt_key, task_section, Fixture, FixtureEntry, ReplayEngine};
pub use synthetic::{exact_colorer, synthetic_colorer, ExactEngine, SyntheticEngine, SyntheticProfile};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Decoding {
    pub seed: u64,
    pub temperature: f64,
    pub top_k: u32,
    pub top_p: f64,
}

impl Default for Decoding {
    /// Greedy decoding.
    fn default() -> Self {
        Self {
            seed: 12345,
            temperature: 0.0,
            top_k: 1,
            top_p: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "backend", rename_all = "snake_case")]
pub enum Backend {
    HttpModel {
        model_name: String,
        #[serde(default)]
        endpoint: HttpEndpoint,
    },
    ScriptedReplay {
        fixture: PathBuf,
    },
    SyntheticColorer {
        #[serde(flatten)]
        profile: SyntheticProfile,
    },
    /// Oracle-backed colorer; stands in for a deliberate slow solver.
    ExactColorer {
        #[serde(default = "default_exact_budget_ms")]
        budget_ms: u64,
    },
}

fn default_exact_budget_ms() -> u64 {
    60_000
}

fn default_timeout_ms() -> u64 {
    300_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverSpec {
    #[serde(flatten)]
    pub backend: Backend,
    #[serde(default)]
    pub decoding: Decoding,
    #[serde(default = "default_timeout_ms")]
    pub timeout_ms: u64,
    /// Added to every reported wall time.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synthetic_latency_ms: Option<u64>,
    /// Report only `synthetic_latency_ms`, dropping the measured component.
    /// Makes mock runs byte-reproducible.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub exclude_measured: bool,
}

impl SolverSpec {
    pub fn new(backend: Backend) -> Self {
        Self {
            backend,
            decoding: Decoding::default(),
            timeout_ms: default_timeout_ms(),
            synthetic_latency_ms: None,
            exclude_measured: false,
        }
    }

    pub fn synthetic(fix_prob: f64, seed: u64) -> Self {
        Self::new(Backend::SyntheticColorer {
            profile: SyntheticProfile { fix_prob, seed },
        })
    }

    pub fn exact() -> Self {
        Self::new(Backend::ExactColorer {
            budget_ms: default_exact_budget_ms(),
        })
    }

    /// Fixed reported latency with the measured part dropped.
    pub fn with_simulated_latency(mut self, ms: u64) -> Self {
        self.synthetic_latency_ms = Some(ms);
        self.exclude_measured = true;
        self
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_millis(self.timeout_ms)
    }

    /// Builds a callable solver. Replay fixtures are loaded here, so every
    /// instantiation starts with a fresh cursor.
    pub fn instantiate(&self) -> Result<Solver, SolverError> {
        let engine: Box<dyn Engine> = match &self.backend {
            Backend::HttpModel { model_name, endpoint } => Box::new(HttpEngine::new(
                endpoint.clone(),
                model_name.clone(),
                self.decoding,
                self.timeout(),
            )),
            Backend::ScriptedReplay { fixture } => Box::new(ReplayEngine::new(Arc::new(Fixture::load(fixture)?))),
            Backend::SyntheticColorer { profile } => Box::new(SyntheticEngine::new(*profile)?),
            Backend::ExactColorer { budget_ms } => Box::new(ExactEngine::new(Duration::from_millis(*budget_ms))),
        };
        Ok(self.wrap(engine))
    }

    /// Same timing policy as [`instantiate`](Self::instantiate) around a
    /// caller-supplied engine.
    pub fn wrap(&self, engine: Box<dyn Engine>) -> Solver {
        Solver {
            engine,
            latency: self.synthetic_latency_ms.map(Duration::from_millis),
            exclude_measured: self.exclude_measured,
        }
    }
}

/// Structured side channel for engines that do not read prompts.
#[derive(Debug, Clone)]
pub enum RequestContext {
    Coloring(ColoringContext),
}

#[derive(Debug, Clone)]
pub struct ColoringContext {
    pub instance: Arc<GraphInstance>,
    /// 1-based call index within the instance run.
    pub attempt: usize,
    /// The assignment the feedback refers to, if any.
    pub previous: Option<BTreeMap<String, i64>>,
    /// Vertices named by the feedback.
    pub conflict_vertices: Vec<String>,
}

#[derive(Debug, Clone, Copy)]
pub struct SolverRequest<'a> {
    pub prompt: &'a str,
    pub context: Option<&'a RequestContext>,
}

impl<'a> SolverRequest<'a> {
    pub fn prompt(prompt: &'a str) -> Self {
        Self { prompt, context: None }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EngineReply {
    pub text: String,
    pub truncated: bool,
}

impl From<String> for EngineReply {
    fn from(text: String) -> Self {
        Self { text, truncated: false }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolverReply {
    pub text: String,
    pub wall_time: Duration,
    pub truncated: bool,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolverError {
    #[error("solver call timed out after {0:?}")]
    Timeout(Duration),
    #[error("transport error: {0}")]
    Transport(String),
    #[error("replay fixture exhausted for prompt key {0}")]
    FixtureExhausted(String),
    #[error("solver misconfigured: {0}")]
    Config(String),
}

/// A failed call and the time it took.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{error}")]
pub struct SolverFailure {
    pub error: SolverError,
    pub wall_time: Duration,
}

/// Text-producing backend. Implementations must not keep state that makes
/// concurrent calls observe each other, except replay cursors.
pub trait Engine: Send + Sync {
    fn generate(&self, request: &SolverRequest<'_>) -> Result<EngineReply, SolverError>;
}

impl<F> Engine for F
where
    F: Fn(&SolverRequest<'_>) -> Result<EngineReply, SolverError> + Send + Sync,
{
    fn generate(&self, request: &SolverRequest<'_>) -> Result<EngineReply, SolverError> {
        self(request)
    }
}

pub struct Solver {
    engine: Box<dyn Engine>,
    latency: Option<Duration>,
    exclude_measured: bool,
}

impl std::fmt::Debug for Solver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Solver")
            .field("latency", &self.latency)
            .field("exclude_measured", &self.exclude_measured)
            .finish_non_exhaustive()
    }
}

impl Solver {
    pub fn from_engine(engine: impl Engine + 'static) -> Self {
        Self {
            engine: Box::new(engine),
            latency: None,
            exclude_measured: false,
        }
    }

    fn reported(&self, measured: Duration) -> Duration {
        let base = if self.exclude_measured {
            Duration::ZERO
        } else {
            measured
        };
        base + self.latency.unwrap_or_default()
    }

    pub fn complete(&self, request: &SolverRequest<'_>) -> Result<SolverReply, SolverFailure> {
        let start = Instant::now();
        let result = self.engine.generate(request);
        let wall_time = self.reported(start.elapsed());
        match result {
            Ok(reply) => Ok(SolverReply {
                text: reply.text,
                wall_time,
                truncated: reply.truncated,
            }),
            Err(error) => Err(SolverFailure { error, wall_time }),
        }
    }
}
