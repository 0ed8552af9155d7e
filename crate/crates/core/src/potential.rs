//! Scalar potentials of closed flows.
//!
//! For a flow whose fundamental-cycle fluxes all vanish, summing the flow
//! along spanning-tree paths from each component root gives a node function
//! `p` with `flow(u -> v) = p(v) - p(u)` on every edge. Each component's root
//! (its smallest node) is pinned to 0.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::flows::{cycle_flux, EdgeFlow, FlowError};
use crate::graph::{DirectedCycle, NodeId, RecognitionGraph};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PotentialError {
    #[error("cycle {cycle} has nonzero flux {flux}")]
    Closure { cycle: DirectedCycle, flux: i64 },
    #[error("potential has no value for node `{0}`")]
    MissingNode(NodeId),
    #[error("potential value at `{0}` overflows 64 bits")]
    Overflow(NodeId),
    #[error(transparent)]
    Flow(#[from] FlowError),
}

/// Integer node potential with one gauge-fixed root per component.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Potential {
    values: BTreeMap<NodeId, i64>,
    roots: Vec<NodeId>,
}

impl Potential {
    /// Potential from explicit values. No gauge is implied; `roots` is empty.
    pub fn from_values<I: IntoIterator<Item = (NodeId, i64)>>(values: I) -> Self {
        Potential {
            values: values.into_iter().collect(),
            roots: Vec::new(),
        }
    }

    pub fn get(&self, node: &NodeId) -> Option<i64> {
        self.values.get(node).copied()
    }

    /// `(node, value)` pairs in node order.
    pub fn values(&self) -> impl Iterator<Item = (&NodeId, i64)> + '_ {
        self.values.iter().map(|(n, &k)| (n, k))
    }

    /// Gauge roots, one per component, in component order.
    pub fn roots(&self) -> &[NodeId] {
        &self.roots
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Reconstructs the potential of `flow`, or reports the first fundamental
/// cycle (in basis order) whose flux is nonzero.
pub fn solve_potential(flow: &EdgeFlow<'_>) -> Result<Potential, PotentialError> {
    let g = flow.graph();
    let forest = g.spanning_forest();
    let mut value = vec![0i64; g.node_count()];
    for (parent, child) in forest.tree_edges() {
        value[child] = value[parent]
            .checked_add(flow.get_by_index(parent, child))
            .ok_or_else(|| PotentialError::Overflow(g.node(child).clone()))?;
    }

    let basis = g
        .fundamental_cycles(&forest)
        .expect("forest built from this graph");
    for cycle in basis.cycles() {
        let flux = cycle_flux(flow, cycle)?;
        if flux != 0 {
            return Err(PotentialError::Closure {
                cycle: cycle.clone(),
                flux,
            });
        }
    }

    Ok(Potential {
        values: g.nodes().iter().cloned().zip(value).collect(),
        roots: forest.roots().iter().map(|&r| g.node(r).clone()).collect(),
    })
}

/// Discrete gradient: `flow(u -> v) = p(v) - p(u)` on every edge of `graph`.
pub fn gradient<'g>(
    potential: &Potential,
    graph: &'g RecognitionGraph,
) -> Result<EdgeFlow<'g>, PotentialError> {
    let lookup = |n: &NodeId| {
        potential
            .get(n)
            .ok_or_else(|| PotentialError::MissingNode(n.clone()))
    };
    for node in graph.nodes() {
        lookup(node)?;
    }
    let mut flow = EdgeFlow::zero(graph);
    for (u, v) in graph.undirected_edges() {
        let diff = lookup(v)?
            .checked_sub(lookup(u)?)
            .ok_or_else(|| PotentialError::Overflow(v.clone()))?;
        flow.set(u, v, diff)?;
    }
    Ok(flow)
}

/// True iff `p1 - p2` is constant over `component`.
pub fn differ_by_constant(
    p1: &Potential,
    p2: &Potential,
    component: &[NodeId],
) -> Result<bool, PotentialError> {
    let mut offset: Option<i128> = None;
    for node in component {
        let a = p1
            .get(node)
            .ok_or_else(|| PotentialError::MissingNode(node.clone()))?;
        let b = p2
            .get(node)
            .ok_or_else(|| PotentialError::MissingNode(node.clone()))?;
        let d = a as i128 - b as i128;
        match offset {
            None => offset = Some(d),
            Some(o) if o != d => return Ok(false),
            Some(_) => {}
        }
    }
    Ok(true)
}
