//! Integer edge flows (antisymmetric 1-cochains), clearing-window aggregation,
//! and the cycle-closure / path-independence checks.

use std::collections::BTreeMap;
use std::fmt;
use std::ptr;

use thiserror::Error;

use crate::graph::{CycleBasis, DirectedCycle, NodeId, RecognitionGraph};

/// Node limit for [`check_path_independence_bruteforce`] unless overridden.
pub const DEFAULT_BRUTEFORCE_NODES: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FlowError {
    #[error("edge {0} -> {1} is not in the graph")]
    UnknownEdge(NodeId, NodeId),
    #[error("flow on {0} -> {1} overflows 64 bits")]
    Overflow(NodeId, NodeId),
    #[error("conflicting values for {0} -> {1} and its reverse")]
    AntisymmetryConflict(NodeId, NodeId),
    #[error("window [{t0}, {t0}+{len}) exceeds the {available} available ticks")]
    WindowOutOfRange {
        t0: usize,
        len: usize,
        available: usize,
    },
    #[error("window length must be at least 1")]
    EmptyWindow,
    #[error("path is broken between {0} and {1}")]
    BrokenPath(NodeId, NodeId),
    #[error("flows or cycles belong to different graphs")]
    GraphMismatch,
    #[error("brute-force oracle limited to {max} nodes, graph has {nodes}")]
    TooLarge { nodes: usize, max: usize },
    #[error("brute-force oracle requires a connected graph")]
    Disconnected,
}

/// Antisymmetric integer flow on the directed edges of one graph.
///
/// One value is stored per undirected edge, in the `lower -> higher`
/// orientation; the reverse edge reads as its negation. Zero entries are not
/// stored, so equal flows compare equal.
#[derive(Clone)]
pub struct EdgeFlow<'g> {
    graph: &'g RecognitionGraph,
    values: BTreeMap<usize, i64>,
}

impl<'g> EdgeFlow<'g> {
    pub fn zero(graph: &'g RecognitionGraph) -> Self {
        EdgeFlow {
            graph,
            values: BTreeMap::new(),
        }
    }

    /// Builds a flow from directed-edge values. Giving both orientations of an
    /// edge is allowed only if they are negatives of each other.
    pub fn from_directed<I>(graph: &'g RecognitionGraph, entries: I) -> Result<Self, FlowError>
    where
        I: IntoIterator<Item = ((NodeId, NodeId), i64)>,
    {
        let mut seen: BTreeMap<usize, i64> = BTreeMap::new();
        let mut flow = EdgeFlow::zero(graph);
        for ((u, v), k) in entries {
            let (slot, sign) = flow.slot(&u, &v)?;
            let stored = sign
                .checked_mul(k)
                .ok_or_else(|| FlowError::Overflow(u.clone(), v.clone()))?;
            if let Some(&prev) = seen.get(&slot) {
                if prev != stored {
                    return Err(FlowError::AntisymmetryConflict(u, v));
                }
                continue;
            }
            seen.insert(slot, stored);
            flow.store(slot, stored);
        }
        Ok(flow)
    }

    pub fn graph(&self) -> &'g RecognitionGraph {
        self.graph
    }

    fn slot(&self, u: &NodeId, v: &NodeId) -> Result<(usize, i64), FlowError> {
        let unknown = || FlowError::UnknownEdge(u.clone(), v.clone());
        let iu = self.graph.index_of(u).ok_or_else(unknown)?;
        let iv = self.graph.index_of(v).ok_or_else(unknown)?;
        self.graph.edge_slot(iu, iv).ok_or_else(unknown)
    }

    fn store(&mut self, slot: usize, value: i64) {
        if value == 0 {
            self.values.remove(&slot);
        } else {
            self.values.insert(slot, value);
        }
    }

    /// Value on `u -> v`, or `None` if that edge is not in the graph.
    pub fn get(&self, u: &NodeId, v: &NodeId) -> Option<i64> {
        let (slot, sign) = self.slot(u, v).ok()?;
        Some(sign * self.values.get(&slot).copied().unwrap_or(0))
    }

    /// Value on `u -> v` by node index. Panics if the edge is absent.
    pub fn get_by_index(&self, u: usize, v: usize) -> i64 {
        let (slot, sign) = self.graph.edge_slot(u, v).expect("edge in graph");
        sign * self.values.get(&slot).copied().unwrap_or(0)
    }

    /// Sets `u -> v` to `value` (and the reverse to `-value`).
    pub fn set(&mut self, u: &NodeId, v: &NodeId, value: i64) -> Result<(), FlowError> {
        let (slot, sign) = self.slot(u, v)?;
        let stored = sign
            .checked_mul(value)
            .ok_or_else(|| FlowError::Overflow(u.clone(), v.clone()))?;
        self.store(slot, stored);
        Ok(())
    }

    /// Adds `delta` to `u -> v` (and `-delta` to the reverse).
    pub fn add(&mut self, u: &NodeId, v: &NodeId, delta: i64) -> Result<(), FlowError> {
        let (slot, sign) = self.slot(u, v)?;
        let current = self.values.get(&slot).copied().unwrap_or(0);
        let next = sign
            .checked_mul(delta)
            .and_then(|d| current.checked_add(d))
            .ok_or_else(|| FlowError::Overflow(u.clone(), v.clone()))?;
        self.store(slot, next);
        Ok(())
    }

    /// Edgewise sum with another flow on the same graph.
    pub fn checked_add(&self, other: &EdgeFlow<'_>) -> Result<EdgeFlow<'g>, FlowError> {
        if !same_graph(self.graph, other.graph) {
            return Err(FlowError::GraphMismatch);
        }
        let mut out = self.clone();
        for (&slot, &k) in &other.values {
            let current = out.values.get(&slot).copied().unwrap_or(0);
            let next = current.checked_add(k).ok_or_else(|| {
                let (u, v) = self.graph.edge_pairs()[slot];
                FlowError::Overflow(self.graph.node(u).clone(), self.graph.node(v).clone())
            })?;
            out.store(slot, next);
        }
        Ok(out)
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    /// Number of undirected edges carrying a nonzero value.
    pub fn support_len(&self) -> usize {
        self.values.len()
    }

    /// Nonzero values in stored orientation (`lower -> higher`), edge order.
    pub fn nonzero(&self) -> impl Iterator<Item = (&'g NodeId, &'g NodeId, i64)> + '_ {
        let g = self.graph;
        self.values.iter().map(move |(&slot, &k)| {
            let (u, v) = g.edge_pairs()[slot];
            (g.node(u), g.node(v), k)
        })
    }

    /// Every directed edge with its value, ordered by `(u, v)`.
    pub fn directed_values(&self) -> impl Iterator<Item = (&'g NodeId, &'g NodeId, i64)> + '_ {
        self.graph
            .directed_edges()
            .map(move |(u, v)| (u, v, self.get(u, v).expect("edge in graph")))
    }
}

impl PartialEq for EdgeFlow<'_> {
    fn eq(&self, other: &Self) -> bool {
        same_graph(self.graph, other.graph) && self.values == other.values
    }
}

impl Eq for EdgeFlow<'_> {}

impl fmt::Debug for EdgeFlow<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map()
            .entries(self.nonzero().map(|(u, v, k)| (format!("{u}->{v}"), k)))
            .finish()
    }
}

fn same_graph(a: &RecognitionGraph, b: &RecognitionGraph) -> bool {
    ptr::eq(a, b) || a == b
}

/// Half-open tick interval `[t0, t0 + len)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    t0: usize,
    len: usize,
}

impl Window {
    pub fn new(t0: usize, len: usize) -> Result<Self, FlowError> {
        if len == 0 {
            return Err(FlowError::EmptyWindow);
        }
        Ok(Window { t0, len })
    }

    pub fn start(&self) -> usize {
        self.t0
    }

    pub fn len(&self) -> usize {
        self.len
    }

    /// Always false; a window has at least one tick.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn end(&self) -> usize {
        self.t0 + self.len
    }
}

/// Cumulative flow over `window`: the edgewise sum of the increments of the
/// ticks it covers.
pub fn accumulate<'g>(
    increments: &[EdgeFlow<'g>],
    window: Window,
) -> Result<EdgeFlow<'g>, FlowError> {
    let out_of_range = FlowError::WindowOutOfRange {
        t0: window.t0,
        len: window.len,
        available: increments.len(),
    };
    let end = window
        .t0
        .checked_add(window.len)
        .ok_or(out_of_range.clone())?;
    let ticks = increments.get(window.t0..end).ok_or(out_of_range)?;
    let mut total = EdgeFlow::zero(ticks[0].graph);
    for inc in ticks {
        total = total.checked_add(inc)?;
    }
    Ok(total)
}

/// Signed sum of `flow` along the directed edges `path`, which must chain
/// head to tail. The empty path sums to zero.
pub fn path_sum(flow: &EdgeFlow<'_>, path: &[(NodeId, NodeId)]) -> Result<i64, FlowError> {
    let mut sum: i64 = 0;
    for (i, (u, v)) in path.iter().enumerate() {
        if i > 0 && path[i - 1].1 != *u {
            return Err(FlowError::BrokenPath(path[i - 1].1.clone(), u.clone()));
        }
        let k = flow
            .get(u, v)
            .ok_or_else(|| FlowError::UnknownEdge(u.clone(), v.clone()))?;
        sum = sum
            .checked_add(k)
            .ok_or_else(|| FlowError::Overflow(u.clone(), v.clone()))?;
    }
    Ok(sum)
}

/// Signed sum of `flow` around `cycle` in its orientation.
pub fn cycle_flux(flow: &EdgeFlow<'_>, cycle: &DirectedCycle) -> Result<i64, FlowError> {
    walk_flux(flow, cycle.vertices(), true)
}

/// Signed sum along the vertex sequence `walk`; with `closed`, the edge from
/// the last vertex back to the first is included.
pub fn walk_flux(flow: &EdgeFlow<'_>, walk: &[NodeId], closed: bool) -> Result<i64, FlowError> {
    let n = walk.len();
    let steps = if closed && n > 1 {
        n
    } else {
        n.saturating_sub(1)
    };
    let mut sum: i64 = 0;
    for i in 0..steps {
        let (u, v) = (&walk[i], &walk[(i + 1) % n]);
        let k = flow
            .get(u, v)
            .ok_or_else(|| FlowError::UnknownEdge(u.clone(), v.clone()))?;
        sum = sum
            .checked_add(k)
            .ok_or_else(|| FlowError::Overflow(u.clone(), v.clone()))?;
    }
    Ok(sum)
}

/// Splits a closed walk into simple directed cycles (including two-vertex
/// back-and-forth cycles) by cutting it wherever a vertex repeats.
pub fn decompose_closed_walk(walk: &[NodeId]) -> Vec<DirectedCycle> {
    let mut cycles = Vec::new();
    let mut stack: Vec<NodeId> = Vec::new();
    let closed = walk.iter().chain(walk.first());
    for v in closed {
        if let Some(pos) = stack.iter().position(|x| x == v) {
            let loop_vertices: Vec<NodeId> = stack.drain(pos + 1..).collect();
            if !loop_vertices.is_empty() {
                let mut cycle = vec![v.clone()];
                cycle.extend(loop_vertices);
                cycles.push(DirectedCycle::new(cycle));
            }
        } else {
            stack.push(v.clone());
        }
    }
    cycles
}

/// Outcome of checking a flow against a cycle basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosureReport {
    /// Basis cycles with nonzero flux, in basis order.
    pub violations: Vec<(DirectedCycle, i64)>,
}

impl ClosureReport {
    pub fn closed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Decides cycle closure of `flow` by checking every cycle of `basis`.
pub fn check_cycle_closure(
    flow: &EdgeFlow<'_>,
    basis: &CycleBasis,
) -> Result<ClosureReport, FlowError> {
    if basis.len() != flow.graph.cycle_rank() {
        return Err(FlowError::GraphMismatch);
    }
    let mut violations = Vec::new();
    for cycle in basis.cycles() {
        let flux = cycle_flux(flow, cycle).map_err(|e| match e {
            FlowError::UnknownEdge(..) => FlowError::GraphMismatch,
            other => other,
        })?;
        if flux != 0 {
            violations.push((cycle.clone(), flux));
        }
    }
    Ok(ClosureReport { violations })
}

/// Independent path-independence oracle: enumerates every simple directed
/// path from every source and checks that all paths between the same
/// endpoints carry the same sum. Exponential in the node count.
pub fn check_path_independence_bruteforce(
    flow: &EdgeFlow<'_>,
    max_nodes: usize,
) -> Result<bool, FlowError> {
    let g = flow.graph;
    let n = g.node_count();
    if n > max_nodes || n > 64 {
        return Err(FlowError::TooLarge {
            nodes: n,
            max: max_nodes.min(64),
        });
    }
    if !g.is_connected() {
        return Err(FlowError::Disconnected);
    }
    // dense antisymmetric matrix; widened so long paths cannot overflow
    let mut weight = vec![vec![0i128; n]; n];
    for &(u, v) in g.edge_pairs() {
        let k = flow.get_by_index(u, v) as i128;
        weight[u][v] = k;
        weight[v][u] = -k;
    }

    struct Search<'a> {
        g: &'a RecognitionGraph,
        weight: &'a [Vec<i128>],
        first: Vec<Option<i128>>,
    }

    impl Search<'_> {
        fn visit(&mut self, at: usize, visited: u64, sum: i128) -> bool {
            match self.first[at] {
                Some(s) if s != sum => return false,
                Some(_) => {}
                None => self.first[at] = Some(sum),
            }
            for &next in self.g.neighbors(at) {
                if visited & (1 << next) == 0
                    && !self.visit(next, visited | (1 << next), sum + self.weight[at][next])
                {
                    return false;
                }
            }
            true
        }
    }

    for source in 0..n {
        let mut search = Search {
            g,
            weight: &weight,
            first: vec![None; n],
        };
        if !search.visit(source, 1 << source, 0) {
            return Ok(false);
        }
    }
    Ok(true)
}
