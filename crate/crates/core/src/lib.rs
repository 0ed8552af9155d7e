//! Deterministic discrete-ledger verification kernel.
//!
//! The crate is organised bottom-up:
//!
//! - [`cost`]: the reciprocal cost `J(x) = (x + 1/x)/2 - 1` and checks of its
//!   functional identities.
//! - [`graph`]: reversal-closed directed graphs with deterministic spanning
//!   forests and fundamental cycle bases.
//! - [`ledger`]: the single-event, double-entry, integer-quantized state machine
//!   and trace replay.
//! - [`flows`]: clearing-window aggregation of per-tick edge increments, cycle
//!   flux, and the closure / path-independence checks.
//! - [`potential`]: scalar potentials of closed flows via spanning-tree sums.
//! - [`scheduler`]: Gray-code walks on hypercubes and walk validation.
//! - [`trace_io`]: the line-oriented `.trace` and walk file formats.
//! - [`cli`]: the command-line front end.

pub mod cli;
pub mod cost;
pub mod flows;
pub mod graph;
pub mod ledger;
pub mod potential;
pub mod scheduler;
pub mod trace_io;

pub use flows::{EdgeFlow, Window};
pub use graph::{CycleBasis, DirectedCycle, NodeId, RecognitionGraph, SpanningForest};
pub use ledger::{Event, LedgerState, Quantum, Trace};
pub use potential::Potential;
