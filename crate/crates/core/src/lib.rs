//! Steady-state analysis of Markovian queues with impatient customers and
//! server vacations.
//!
//! Three engines compute the same [`PerformanceReport`]: closed-form
//! generating-function solutions (`analytic`), a truncated Markov-chain solve
//! (`oracle`) and a discrete-event simulator (`sim`). They are registered by
//! name in [`engine::EngineRegistry`].

// `!(x > 0.0)` is deliberate: it rejects NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod compare;
pub mod engine;
pub mod error;
pub mod format;
pub mod kernels;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod quad;
pub mod report;
pub mod sim;
pub mod sweep;

pub use error::{Error, Result};
pub use model::{BalanceVariant, EngineKind, ModelParams, Policy, QueueState, Transition};
pub use report::{PerformanceReport, SojournSummary};
