//! Fast/slow solver orchestration: a fast solver iterates under feedback
//! from a metacognitive controller and a slow solver takes over when it
//! stalls. Ships with graph-coloring and code-debugging domains.

pub mod debug;
pub mod gc;
pub mod graph;
pub mod harness;
pub mod memory;
pub mod metacog;
pub mod num;
pub mod solvers;
pub mod template;

use num_rational::Rational64;

/// Exact scalar used for scores.
pub type Exact = Rational64;

pub type ConflictReport = graph::ConflictReport<f64>;
pub type ExactConflictReport = graph::ConflictReport<Exact>;
pub type Outcome = metacog::Outcome<f64>;
pub type ExactOutcome = metacog::Outcome<Exact>;
pub type Transcript = metacog::Transcript<f64>;
