//! Single-event, double-entry ledger state machine.
//!
//! Balances are integers counted in units of the posting quantum `delta`.
//! The quantum itself is only metadata; no arithmetic in this module ever
//! touches it. Each tick applies at most one [`Event`], and a posting moves
//! `k` units along one edge, so it changes exactly two balances by `-k` and
//! `+k`.

use std::collections::BTreeMap;
use std::fmt;

use num_integer::Integer;
use thiserror::Error;

use crate::flows::{EdgeFlow, FlowError};
use crate::graph::{NodeId, RecognitionGraph};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LedgerError {
    #[error("quantum must be a positive reduced fraction, got {0}/{1}")]
    InvalidQuantum(u64, u64),
    #[error("edge {0} -> {1} is not in the graph")]
    UnknownEdge(NodeId, NodeId),
    #[error("posting on {0} -> {1} has zero magnitude")]
    DegenerateEvent(NodeId, NodeId),
    #[error("posting magnitude {0} is not a unit (strict mode)")]
    NonUnitMagnitude(i64),
    #[error("balance of `{0}` overflows 64 bits")]
    Overflow(NodeId),
    #[error("initial state does not cover node `{0}`")]
    MissingBalance(NodeId),
    #[error("initial state has a balance for unknown node `{0}`")]
    UnknownNode(NodeId),
    #[error("tick {tick}: {cause}")]
    Tick {
        tick: usize,
        #[source]
        cause: Box<LedgerError>,
    },
}

impl From<FlowError> for LedgerError {
    fn from(e: FlowError) -> Self {
        match e {
            FlowError::UnknownEdge(u, v) => LedgerError::UnknownEdge(u, v),
            FlowError::Overflow(u, _) => LedgerError::Overflow(u),
            other => unreachable!("per-tick increments only fail on topology: {other}"),
        }
    }
}

/// Posting unit `delta = numerator / denominator`, kept in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Quantum {
    numerator: u64,
    denominator: u64,
}

impl Quantum {
    pub const UNIT: Quantum = Quantum {
        numerator: 1,
        denominator: 1,
    };

    /// Accepts only positive fractions already in lowest terms.
    pub fn new(numerator: u64, denominator: u64) -> Result<Self, LedgerError> {
        if numerator == 0 || denominator == 0 || numerator.gcd(&denominator) != 1 {
            return Err(LedgerError::InvalidQuantum(numerator, denominator));
        }
        Ok(Quantum {
            numerator,
            denominator,
        })
    }

    pub fn numerator(self) -> u64 {
        self.numerator
    }

    pub fn denominator(self) -> u64 {
        self.denominator
    }
}

impl Default for Quantum {
    fn default() -> Self {
        Quantum::UNIT
    }
}

impl fmt::Display for Quantum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numerator, self.denominator)
    }
}

/// What a tick may carry: nothing, or one posting of `magnitude` units along
/// `from -> to`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Event {
    Empty,
    Post {
        from: NodeId,
        to: NodeId,
        magnitude: i64,
    },
}

impl Event {
    pub fn post(from: impl Into<NodeId>, to: impl Into<NodeId>, magnitude: i64) -> Self {
        Event::Post {
            from: from.into(),
            to: to.into(),
            magnitude,
        }
    }
}

/// Which posting magnitudes a replay accepts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum PostingRule {
    /// Any nonzero integer multiple of the quantum.
    #[default]
    Multiples,
    /// Exactly `+delta` or `-delta`.
    StrictUnit,
}

/// Node balances in units of the quantum.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LedgerState {
    balances: BTreeMap<NodeId, i64>,
    quantum: Quantum,
}

impl LedgerState {
    /// All-zero state over the nodes of `graph`.
    pub fn zero(graph: &RecognitionGraph, quantum: Quantum) -> Self {
        LedgerState {
            balances: graph.nodes().iter().map(|n| (n.clone(), 0)).collect(),
            quantum,
        }
    }

    /// State with explicit balances; nodes of `graph` not mentioned start at 0.
    pub fn with_balances<I>(
        graph: &RecognitionGraph,
        quantum: Quantum,
        balances: I,
    ) -> Result<Self, LedgerError>
    where
        I: IntoIterator<Item = (NodeId, i64)>,
    {
        let mut state = LedgerState::zero(graph, quantum);
        for (node, k) in balances {
            match state.balances.get_mut(&node) {
                Some(slot) => *slot = k,
                None => return Err(LedgerError::UnknownNode(node)),
            }
        }
        Ok(state)
    }

    pub fn quantum(&self) -> Quantum {
        self.quantum
    }

    pub fn balance(&self, node: &NodeId) -> Option<i64> {
        self.balances.get(node).copied()
    }

    /// `(node, k)` pairs in node order.
    pub fn balances(&self) -> impl Iterator<Item = (&NodeId, i64)> + '_ {
        self.balances.iter().map(|(n, &k)| (n, k))
    }

    pub fn len(&self) -> usize {
        self.balances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.balances.is_empty()
    }

    /// Sum of all balances in quantum units. Widened so it cannot overflow.
    pub fn total_balance(&self) -> i128 {
        self.balances.values().map(|&k| k as i128).sum()
    }

    /// Applies one event in place. On error the state is left unchanged.
    pub fn apply(
        &mut self,
        event: &Event,
        graph: &RecognitionGraph,
        rule: PostingRule,
    ) -> Result<(), LedgerError> {
        let (from, to, k) = match event {
            Event::Empty => return Ok(()),
            Event::Post {
                from,
                to,
                magnitude,
            } => (from, to, *magnitude),
        };
        check_posting(from, to, k, graph, rule)?;
        let debited = self.balances[from]
            .checked_sub(k)
            .ok_or_else(|| LedgerError::Overflow(from.clone()))?;
        let credited = self.balances[to]
            .checked_add(k)
            .ok_or_else(|| LedgerError::Overflow(to.clone()))?;
        *self.balances.get_mut(from).expect("checked above") = debited;
        *self.balances.get_mut(to).expect("checked above") = credited;
        Ok(())
    }

    fn covers(&self, graph: &RecognitionGraph) -> Result<(), LedgerError> {
        for node in graph.nodes() {
            if !self.balances.contains_key(node) {
                return Err(LedgerError::MissingBalance(node.clone()));
            }
        }
        for node in self.balances.keys() {
            if !graph.contains_node(node) {
                return Err(LedgerError::UnknownNode(node.clone()));
            }
        }
        Ok(())
    }
}

fn check_posting(
    from: &NodeId,
    to: &NodeId,
    k: i64,
    graph: &RecognitionGraph,
    rule: PostingRule,
) -> Result<(), LedgerError> {
    if !graph.contains_edge(from, to) {
        return Err(LedgerError::UnknownEdge(from.clone(), to.clone()));
    }
    if k == 0 {
        return Err(LedgerError::DegenerateEvent(from.clone(), to.clone()));
    }
    if rule == PostingRule::StrictUnit && k != 1 && k != -1 {
        return Err(LedgerError::NonUnitMagnitude(k));
    }
    Ok(())
}

/// Pure single-tick update: returns the successor state.
pub fn apply_tick(
    state: &LedgerState,
    event: &Event,
    graph: &RecognitionGraph,
) -> Result<LedgerState, LedgerError> {
    let mut next = state.clone();
    next.apply(event, graph, PostingRule::Multiples)?;
    Ok(next)
}

/// The sparse 1-cochain recorded by one tick: `k` on `from -> to` and `-k` on
/// the reverse edge.
pub fn per_tick_increment<'g>(
    event: &Event,
    graph: &'g RecognitionGraph,
) -> Result<EdgeFlow<'g>, LedgerError> {
    let mut flow = EdgeFlow::zero(graph);
    if let Event::Post {
        from,
        to,
        magnitude,
    } = event
    {
        check_posting(from, to, *magnitude, graph, PostingRule::Multiples)?;
        flow.add(from, to, *magnitude)?;
    }
    Ok(flow)
}

/// Sum of all balances; see [`LedgerState::total_balance`].
pub fn total_balance(state: &LedgerState) -> i128 {
    state.total_balance()
}

/// A replayable unit: graph, initial balances, and one event slot per tick.
///
/// Tick indices are positions in `events`, so two events can never share a
/// tick.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    graph: RecognitionGraph,
    initial: LedgerState,
    events: Vec<Event>,
}

impl Trace {
    pub fn new(
        graph: RecognitionGraph,
        initial: LedgerState,
        events: Vec<Event>,
    ) -> Result<Self, LedgerError> {
        initial.covers(&graph)?;
        for (tick, event) in events.iter().enumerate() {
            if let Event::Post {
                from,
                to,
                magnitude,
            } = event
            {
                check_posting(from, to, *magnitude, &graph, PostingRule::Multiples).map_err(
                    |cause| LedgerError::Tick {
                        tick,
                        cause: Box::new(cause),
                    },
                )?;
            }
        }
        Ok(Trace {
            graph,
            initial,
            events,
        })
    }

    pub fn graph(&self) -> &RecognitionGraph {
        &self.graph
    }

    pub fn quantum(&self) -> Quantum {
        self.initial.quantum
    }

    pub fn initial(&self) -> &LedgerState {
        &self.initial
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    /// Number of ticks.
    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }
}

/// Result of [`replay`]: the final state and the per-tick increments.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Replay<'g> {
    pub final_state: LedgerState,
    pub increments: Vec<EdgeFlow<'g>>,
}

/// Folds the trace's events over its initial state in tick order.
pub fn replay(trace: &Trace) -> Result<Replay<'_>, LedgerError> {
    replay_with(trace, PostingRule::Multiples)
}

pub fn replay_with(trace: &Trace, rule: PostingRule) -> Result<Replay<'_>, LedgerError> {
    let mut state = trace.initial.clone();
    let mut increments = Vec::with_capacity(trace.events.len());
    for (tick, event) in trace.events.iter().enumerate() {
        let at = |cause| LedgerError::Tick {
            tick,
            cause: Box::new(cause),
        };
        state.apply(event, &trace.graph, rule).map_err(at)?;
        increments.push(per_tick_increment(event, &trace.graph).map_err(at)?);
    }
    Ok(Replay {
        final_state: state,
        increments,
    })
}
