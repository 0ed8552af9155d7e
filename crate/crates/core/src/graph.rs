//! Recognition graphs: finite directed graphs closed under edge reversal.
//!
//! Nodes are kept in ascending [`NodeId`] order and every internal index
//! follows that order, so "smallest id" and "smallest index" coincide. All
//! traversals (components, BFS forests, cycle bases) visit neighbours in
//! ascending order, which makes every derived structure reproducible from the
//! node and edge sets alone, independent of input ordering.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use thiserror::Error;

/// Totally ordered node label.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(String);

impl NodeId {
    pub fn new(label: impl Into<String>) -> Self {
        NodeId(label.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for NodeId {
    fn from(s: &str) -> Self {
        NodeId(s.to_owned())
    }
}

impl From<String> for NodeId {
    fn from(s: String) -> Self {
        NodeId(s)
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("duplicate node `{0}`")]
    DuplicateNode(NodeId),
    #[error("edge ({0}, {1}) references unknown node `{2}`")]
    UnknownEndpoint(NodeId, NodeId, NodeId),
    #[error("self-loop on node `{0}`")]
    SelfLoop(NodeId),
    #[error("spanning forest does not belong to this graph: {0}")]
    ForestMismatch(&'static str),
}

/// Directed graph `G = (X, E)` with `E` closed under reversal and no self-loops.
///
/// Each undirected edge `{u, v}` is stored once with `u < v`; both
/// orientations are members of `E`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecognitionGraph {
    nodes: Vec<NodeId>,
    index: BTreeMap<NodeId, usize>,
    adjacency: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
    edge_index: BTreeMap<(usize, usize), usize>,
}

impl RecognitionGraph {
    /// Builds a graph from node labels and undirected edges.
    ///
    /// Repeated edges (in either orientation) collapse to one, since `E` is a
    /// set.
    pub fn build<N, E>(nodes: N, undirected_edges: E) -> Result<Self, GraphError>
    where
        N: IntoIterator,
        N::Item: Into<NodeId>,
        E: IntoIterator<Item = (NodeId, NodeId)>,
    {
        let mut labels = BTreeSet::new();
        for node in nodes {
            let node = node.into();
            if !labels.insert(node.clone()) {
                return Err(GraphError::DuplicateNode(node));
            }
        }
        let nodes: Vec<NodeId> = labels.into_iter().collect();
        let index: BTreeMap<NodeId, usize> = nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i))
            .collect();

        let mut pairs = BTreeSet::new();
        for (u, v) in undirected_edges {
            let iu = index.get(&u).copied();
            let iv = index.get(&v).copied();
            let (iu, iv) = match (iu, iv) {
                (Some(a), Some(b)) => (a, b),
                (None, _) => return Err(GraphError::UnknownEndpoint(u.clone(), v, u)),
                (_, None) => return Err(GraphError::UnknownEndpoint(u, v.clone(), v)),
            };
            if iu == iv {
                return Err(GraphError::SelfLoop(u));
            }
            pairs.insert((iu.min(iv), iu.max(iv)));
        }

        let mut adjacency = vec![Vec::new(); nodes.len()];
        let mut edges = Vec::with_capacity(pairs.len());
        let mut edge_index = BTreeMap::new();
        for (slot, &(u, v)) in pairs.iter().enumerate() {
            adjacency[u].push(v);
            adjacency[v].push(u);
            edges.push((u, v));
            edge_index.insert((u, v), slot);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }

        Ok(RecognitionGraph {
            nodes,
            index,
            adjacency,
            edges,
            edge_index,
        })
    }

    /// Nodes in ascending order.
    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Number of undirected edges; `|E|` is twice this.
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn directed_edge_count(&self) -> usize {
        2 * self.edges.len()
    }

    pub fn index_of(&self, node: &NodeId) -> Option<usize> {
        self.index.get(node).copied()
    }

    pub fn node(&self, index: usize) -> &NodeId {
        &self.nodes[index]
    }

    pub fn contains_node(&self, node: &NodeId) -> bool {
        self.index.contains_key(node)
    }

    /// Neighbour indices of `index`, ascending.
    pub fn neighbors(&self, index: usize) -> &[usize] {
        &self.adjacency[index]
    }

    /// Undirected edges as `(lower, higher)` index pairs, ascending.
    pub fn edge_pairs(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Undirected edges as label pairs with the smaller label first.
    pub fn undirected_edges(&self) -> impl Iterator<Item = (&NodeId, &NodeId)> + '_ {
        self.edges
            .iter()
            .map(move |&(u, v)| (&self.nodes[u], &self.nodes[v]))
    }

    /// Every directed edge `(u, v)` in `E`, ordered by `(u, v)`.
    pub fn directed_edges(&self) -> impl Iterator<Item = (&NodeId, &NodeId)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(move |(u, list)| list.iter().map(move |&v| (&self.nodes[u], &self.nodes[v])))
    }

    /// Storage slot of the directed edge `u -> v` and its orientation sign:
    /// `+1` when `u < v` (stored orientation), `-1` otherwise.
    pub fn edge_slot(&self, u: usize, v: usize) -> Option<(usize, i64)> {
        if u < v {
            self.edge_index.get(&(u, v)).map(|&s| (s, 1))
        } else {
            self.edge_index.get(&(v, u)).map(|&s| (s, -1))
        }
    }

    pub fn contains_edge(&self, u: &NodeId, v: &NodeId) -> bool {
        match (self.index_of(u), self.index_of(v)) {
            (Some(a), Some(b)) => self.edge_slot(a, b).is_some(),
            _ => false,
        }
    }

    /// Re-checks `(u, v) in E <=> (v, u) in E` and the absence of self-loops
    /// by scanning the adjacency lists.
    pub fn check_reversal_closure(&self) -> bool {
        self.adjacency.iter().enumerate().all(|(u, list)| {
            list.iter()
                .all(|&v| v != u && self.adjacency[v].binary_search(&u).is_ok())
        })
    }

    /// Connected components as index lists, each ascending, ordered by their
    /// smallest member.
    pub fn component_indices(&self) -> Vec<Vec<usize>> {
        let n = self.nodes.len();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut members = vec![start];
            let mut stack = vec![start];
            while let Some(u) = stack.pop() {
                for &v in &self.adjacency[u] {
                    if !seen[v] {
                        seen[v] = true;
                        members.push(v);
                        stack.push(v);
                    }
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }

    /// Partition of the nodes by undirected connectivity.
    pub fn components(&self) -> Vec<Vec<NodeId>> {
        self.component_indices()
            .into_iter()
            .map(|c| c.into_iter().map(|i| self.nodes[i].clone()).collect())
            .collect()
    }

    pub fn is_connected(&self) -> bool {
        self.component_indices().len() <= 1
    }

    /// Breadth-first spanning forest rooted at the smallest node of each
    /// component, neighbours visited in ascending order.
    pub fn spanning_forest(&self) -> SpanningForest {
        let n = self.nodes.len();
        let mut parent = vec![None; n];
        let mut depth = vec![0usize; n];
        let mut component = vec![usize::MAX; n];
        let mut roots = Vec::new();
        let mut order = Vec::with_capacity(n);

        for start in 0..n {
            if component[start] != usize::MAX {
                continue;
            }
            let comp = roots.len();
            roots.push(start);
            component[start] = comp;
            let mut queue = VecDeque::from([start]);
            while let Some(u) = queue.pop_front() {
                order.push(u);
                for &v in &self.adjacency[u] {
                    if component[v] == usize::MAX {
                        component[v] = comp;
                        parent[v] = Some(u);
                        depth[v] = depth[u] + 1;
                        queue.push_back(v);
                    }
                }
            }
        }

        SpanningForest {
            roots,
            parent,
            depth,
            component,
            order,
        }
    }

    /// One directed cycle per non-tree edge of `forest`.
    ///
    /// For the non-tree edge `{u, v}` with `u < v` the cycle is `u -> v`
    /// followed by the tree path from `v` back to `u`. Cycles are listed in
    /// ascending order of their non-tree edge.
    pub fn fundamental_cycles(&self, forest: &SpanningForest) -> Result<CycleBasis, GraphError> {
        forest.validate_against(self)?;
        let mut cycles = Vec::new();
        for &(u, v) in &self.edges {
            if forest.is_tree_edge(u, v) {
                continue;
            }
            let vertices = forest
                .cycle_through(u, v)
                .into_iter()
                .map(|i| self.nodes[i].clone())
                .collect();
            cycles.push(DirectedCycle::new(vertices));
        }
        Ok(CycleBasis { cycles })
    }

    /// Fundamental cycle basis of the canonical spanning forest.
    pub fn cycle_basis(&self) -> CycleBasis {
        let forest = self.spanning_forest();
        self.fundamental_cycles(&forest)
            .expect("canonical forest always matches its graph")
    }

    /// `|E_und| - |X| + #components`, the dimension of the cycle space.
    pub fn cycle_rank(&self) -> usize {
        self.edges.len() + self.component_indices().len() - self.nodes.len()
    }
}

/// BFS spanning forest over node indices of one [`RecognitionGraph`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpanningForest {
    roots: Vec<usize>,
    parent: Vec<Option<usize>>,
    depth: Vec<usize>,
    component: Vec<usize>,
    order: Vec<usize>,
}

impl SpanningForest {
    /// Root index of each component, in component order.
    pub fn roots(&self) -> &[usize] {
        &self.roots
    }

    pub fn parent(&self, node: usize) -> Option<usize> {
        self.parent[node]
    }

    pub fn depth(&self, node: usize) -> usize {
        self.depth[node]
    }

    pub fn component_of(&self, node: usize) -> usize {
        self.component[node]
    }

    /// Nodes in BFS discovery order; every node appears after its parent.
    pub fn bfs_order(&self) -> &[usize] {
        &self.order
    }

    pub fn node_count(&self) -> usize {
        self.parent.len()
    }

    pub fn is_tree_edge(&self, u: usize, v: usize) -> bool {
        self.parent[v] == Some(u) || self.parent[u] == Some(v)
    }

    /// Tree edges as `(parent, child)` pairs in BFS order.
    pub fn tree_edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.order
            .iter()
            .filter_map(move |&c| self.parent[c].map(|p| (p, c)))
    }

    /// Closed walk `u -> v -> ... -> u` where the return leg follows the tree.
    /// Returned as the vertex sequence without repeating `u` at the end.
    fn cycle_through(&self, u: usize, v: usize) -> Vec<usize> {
        // climb from v up to the lowest common ancestor, then descend to u
        let mut up_from_v = vec![v];
        let mut down_to_u = Vec::new();
        let (mut a, mut b) = (v, u);
        while self.depth[a] > self.depth[b] {
            a = self.parent[a].expect("non-root has parent");
            up_from_v.push(a);
        }
        while self.depth[b] > self.depth[a] {
            down_to_u.push(b);
            b = self.parent[b].expect("non-root has parent");
        }
        while a != b {
            a = self.parent[a].expect("non-root has parent");
            up_from_v.push(a);
            down_to_u.push(b);
            b = self.parent[b].expect("non-root has parent");
        }
        // up_from_v ends at the LCA; down_to_u lists the u-side bottom-up
        let mut cycle = Vec::with_capacity(up_from_v.len() + down_to_u.len());
        if let Some(&last) = down_to_u.first() {
            debug_assert_eq!(last, u);
            cycle.push(u);
            cycle.extend(up_from_v.iter().copied());
            cycle.extend(down_to_u.iter().rev().copied().filter(|&x| x != u));
        } else {
            // u is the LCA itself: u -> v -> ... -> (child of u)
            cycle.push(u);
            cycle.extend(up_from_v.iter().copied().filter(|&x| x != u));
        }
        cycle
    }

    fn validate_against(&self, g: &RecognitionGraph) -> Result<(), GraphError> {
        if self.parent.len() != g.node_count() {
            return Err(GraphError::ForestMismatch("node count differs"));
        }
        let comps = g.component_indices();
        if self.roots.len() != comps.len() {
            return Err(GraphError::ForestMismatch("component count differs"));
        }
        for (child, p) in self.parent.iter().enumerate() {
            if let Some(p) = *p {
                if g.edge_slot(p, child).is_none() {
                    return Err(GraphError::ForestMismatch("tree edge missing from graph"));
                }
            }
        }
        for (comp, members) in comps.iter().enumerate() {
            if members.iter().any(|&m| self.component[m] != comp) {
                return Err(GraphError::ForestMismatch("component membership differs"));
            }
        }
        Ok(())
    }
}

/// Directed cycle `v0 -> v1 -> ... -> v(n-1) -> v0`, stored without the
/// closing repeat of `v0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirectedCycle {
    vertices: Vec<NodeId>,
}

impl DirectedCycle {
    pub fn new(vertices: Vec<NodeId>) -> Self {
        DirectedCycle { vertices }
    }

    pub fn vertices(&self) -> &[NodeId] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Directed edges including the closing edge back to the first vertex.
    pub fn edges(&self) -> impl Iterator<Item = (&NodeId, &NodeId)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (&self.vertices[i], &self.vertices[(i + 1) % n]))
    }
}

impl fmt::Display for DirectedCycle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.vertices {
            write!(f, "{v}->")?;
        }
        match self.vertices.first() {
            Some(v) => write!(f, "{v}"),
            None => Ok(()),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CycleBasis {
    cycles: Vec<DirectedCycle>,
}

impl CycleBasis {
    pub fn cycles(&self) -> &[DirectedCycle] {
        &self.cycles
    }

    pub fn len(&self) -> usize {
        self.cycles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cycles.is_empty()
    }
}
