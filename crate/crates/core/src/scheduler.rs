//! Gray-code schedules on the hypercube `Q_d`.
//!
//! A schedule is a walk that activates one vertex per tick. It is
//! *atomic* when consecutive vertices are adjacent, *complete* when every one
//! of the `2^d` vertices appears, and *unique* when no vertex repeats. The
//! reflected Gray code `g(k) = k ^ (k >> 1)` is a walk with all three
//! properties and period exactly `2^d`; no shorter walk can be both complete
//! and unique.

use std::fmt;

use num_integer::Integer;
use thiserror::Error;

use crate::graph::{NodeId, RecognitionGraph};
use crate::ledger::{Event, LedgerState, Quantum, Trace};

/// Largest supported hypercube dimension.
pub const MAX_DIM: u32 = 24;
/// Largest dimension [`dimension_scan`] accepts (`2^d * 45` must fit in `u128`).
pub const MAX_SCAN_DIM: u32 = 120;
/// Reference period of the gap-45 synchronization condition.
pub const GAP_PERIOD: u128 = 45;
/// Common period the gap-45 condition asks for.
pub const SYNC_PERIOD: u128 = 360;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScheduleError {
    #[error("dimension {0} outside 1..={MAX_DIM}")]
    Dimension(u32),
    #[error("index {index} outside 0..2^{dim}")]
    Index { index: u64, dim: u32 },
    #[error("vertex {position} has {found} bits, walk dimension is {expected}")]
    Width {
        position: usize,
        expected: u32,
        found: u32,
    },
    #[error("`{0}` is not a bitstring")]
    NotBits(String),
    #[error("vertices {from} and {to} at step {step} are not adjacent")]
    NotAdjacent {
        step: usize,
        from: HypercubeVertex,
        to: HypercubeVertex,
    },
    #[error("posting magnitude must be nonzero")]
    ZeroMagnitude,
    #[error("scan dimension {0} outside 1..={MAX_SCAN_DIM}")]
    ScanDimension(u32),
}

fn check_dim(d: u32) -> Result<(), ScheduleError> {
    if (1..=MAX_DIM).contains(&d) {
        Ok(())
    } else {
        Err(ScheduleError::Dimension(d))
    }
}

/// A vertex of `Q_d`: `d` bits, rendered most significant bit first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HypercubeVertex {
    dim: u32,
    bits: u32,
}

impl HypercubeVertex {
    pub fn new(bits: u32, dim: u32) -> Result<Self, ScheduleError> {
        check_dim(dim)?;
        if u64::from(bits) >> dim != 0 {
            return Err(ScheduleError::Index {
                index: bits.into(),
                dim,
            });
        }
        Ok(HypercubeVertex { dim, bits })
    }

    /// Parses a `0`/`1` string; its length is the dimension.
    pub fn parse(s: &str) -> Result<Self, ScheduleError> {
        if s.is_empty() || !s.bytes().all(|b| b == b'0' || b == b'1') {
            return Err(ScheduleError::NotBits(s.to_owned()));
        }
        let dim = u32::try_from(s.len()).map_err(|_| ScheduleError::NotBits(s.to_owned()))?;
        check_dim(dim)?;
        let bits = u32::from_str_radix(s, 2).expect("validated bitstring");
        Ok(HypercubeVertex { dim, bits })
    }

    pub fn dim(self) -> u32 {
        self.dim
    }

    pub fn bits(self) -> u32 {
        self.bits
    }

    pub fn hamming(self, other: HypercubeVertex) -> u32 {
        (self.bits ^ other.bits).count_ones()
    }

    pub fn is_adjacent(self, other: HypercubeVertex) -> bool {
        self.dim == other.dim && self.hamming(other) == 1
    }

    pub fn node_id(self) -> NodeId {
        NodeId::new(self.to_string())
    }
}

impl fmt::Display for HypercubeVertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:0width$b}", self.bits, width = self.dim as usize)
    }
}

/// `g(k) = k ^ (k >> 1)` as a vertex of `Q_d`.
pub fn gray_code(k: u64, d: u32) -> Result<HypercubeVertex, ScheduleError> {
    check_dim(d)?;
    if k >> d != 0 {
        return Err(ScheduleError::Index { index: k, dim: d });
    }
    Ok(HypercubeVertex {
        dim: d,
        bits: (k ^ (k >> 1)) as u32,
    })
}

/// One active vertex per tick.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Walk {
    pub dim: u32,
    pub vertices: Vec<HypercubeVertex>,
}

impl Walk {
    pub fn new(dim: u32, vertices: Vec<HypercubeVertex>) -> Self {
        Walk { dim, vertices }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    fn check_widths(&self) -> Result<(), ScheduleError> {
        check_dim(self.dim)?;
        for (position, v) in self.vertices.iter().enumerate() {
            if v.dim != self.dim {
                return Err(ScheduleError::Width {
                    position,
                    expected: self.dim,
                    found: v.dim,
                });
            }
        }
        Ok(())
    }

    /// Consecutive pairs, plus the closing pair when `cyclic`.
    fn steps(
        &self,
        cyclic: bool,
    ) -> impl Iterator<Item = (usize, HypercubeVertex, HypercubeVertex)> + '_ {
        let n = self.vertices.len();
        let count = if cyclic { n } else { n.saturating_sub(1) };
        (0..count).map(move |i| (i, self.vertices[i], self.vertices[(i + 1) % n]))
    }
}

/// `[g(0), g(1), ..., g(2^d - 1)]`.
pub fn gray_cycle(d: u32) -> Result<Walk, ScheduleError> {
    check_dim(d)?;
    let vertices = (0..1u64 << d)
        .map(|k| HypercubeVertex {
            dim: d,
            bits: (k ^ (k >> 1)) as u32,
        })
        .collect();
    Ok(Walk::new(d, vertices))
}

/// Independent verdicts on a walk.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WalkReport {
    pub atomic: bool,
    pub complete: bool,
    pub unique: bool,
    pub period: usize,
}

impl WalkReport {
    /// Atomic, complete and unique together.
    pub fn valid(&self) -> bool {
        self.atomic && self.complete && self.unique
    }
}

/// Checks atomicity (including the wraparound step when `cyclic`), spatial
/// completeness and label uniqueness.
pub fn validate_walk(walk: &Walk, cyclic: bool) -> Result<WalkReport, ScheduleError> {
    walk.check_widths()?;
    let atomic = walk.steps(cyclic).all(|(_, a, b)| a.is_adjacent(b));
    let size = 1usize << walk.dim;
    let mut seen = vec![false; size];
    let mut distinct = 0usize;
    let mut unique = true;
    for v in &walk.vertices {
        let slot = &mut seen[v.bits as usize];
        if *slot {
            unique = false;
        } else {
            *slot = true;
            distinct += 1;
        }
    }
    Ok(WalkReport {
        atomic,
        complete: distinct == size,
        unique,
        period: walk.vertices.len(),
    })
}

/// `2^d`, the least period of a complete, unique atomic schedule on `Q_d`.
pub fn minimal_period(d: u32) -> Result<u64, ScheduleError> {
    check_dim(d)?;
    Ok(1u64 << d)
}

/// `Q_d` as a recognition graph; nodes are labelled by their bitstrings.
pub fn hypercube_graph(d: u32) -> Result<RecognitionGraph, ScheduleError> {
    check_dim(d)?;
    let nodes: Vec<NodeId> = (0..1u32 << d)
        .map(|b| HypercubeVertex { dim: d, bits: b }.node_id())
        .collect();
    let mut edges = Vec::with_capacity((d as usize) << (d - 1));
    for b in 0..1u32 << d {
        for bit in 0..d {
            let other = b ^ (1 << bit);
            if b < other {
                edges.push((nodes[b as usize].clone(), nodes[other as usize].clone()));
            }
        }
    }
    Ok(RecognitionGraph::build(nodes, edges).expect("hypercube edges are well formed"))
}

/// Turns a walk into a trace on `Q_d` whose tick `t` posts `magnitude` units
/// along `v_t -> v_{t+1}`. A cyclic walk also posts the closing step, so it
/// yields one tick per vertex; an open walk yields one fewer.
pub fn walk_to_trace(
    walk: &Walk,
    magnitude: i64,
    quantum: Quantum,
    cyclic: bool,
) -> Result<Trace, ScheduleError> {
    walk.check_widths()?;
    if magnitude == 0 {
        return Err(ScheduleError::ZeroMagnitude);
    }
    let cyclic = cyclic && walk.vertices.len() > 1;
    let mut events = Vec::new();
    for (step, from, to) in walk.steps(cyclic) {
        if !from.is_adjacent(to) {
            return Err(ScheduleError::NotAdjacent { step, from, to });
        }
        events.push(Event::post(from.node_id(), to.node_id(), magnitude));
    }
    let graph = hypercube_graph(walk.dim)?;
    let initial = LedgerState::zero(&graph, quantum);
    Ok(Trace::new(graph, initial, events).expect("adjacent hypercube steps are graph edges"))
}

/// One row of [`dimension_scan`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DimensionRow {
    pub dim: u32,
    /// `lcm(2^d, 45)`, computed exactly.
    pub lcm: u128,
    pub passes_gap45: bool,
    /// The closed form `2^max(d,3) * 45` sometimes quoted for this lcm.
    pub closed_form: u128,
}

impl DimensionRow {
    /// Whether the closed form agrees with the computed lcm. It does not for
    /// `d < 3`, where the lcm is `2^d * 45 < 360`.
    pub fn closed_form_agrees(&self) -> bool {
        self.closed_form == self.lcm
    }

    /// Survives the gap-45 condition, and the linking condition `d >= 3`
    /// when that is assumed.
    pub fn survives(&self, assume_linking: bool) -> bool {
        self.passes_gap45 && (!assume_linking || self.dim >= 3)
    }
}

/// `lcm(2^d, 45)` for `d = 1..=d_max`.
pub fn dimension_scan(d_max: u32) -> Result<Vec<DimensionRow>, ScheduleError> {
    if !(1..=MAX_SCAN_DIM).contains(&d_max) {
        return Err(ScheduleError::ScanDimension(d_max));
    }
    Ok((1..=d_max)
        .map(|d| {
            let lcm = (1u128 << d).lcm(&GAP_PERIOD);
            DimensionRow {
                dim: d,
                lcm,
                passes_gap45: lcm == SYNC_PERIOD,
                closed_form: (1u128 << d.max(3)) * GAP_PERIOD,
            }
        })
        .collect())
}

/// Dimensions that survive the scan.
pub fn surviving_dimensions(rows: &[DimensionRow], assume_linking: bool) -> Vec<u32> {
    rows.iter()
        .filter(|r| r.survives(assume_linking))
        .map(|r| r.dim)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(w: &Walk) -> Vec<String> {
        w.vertices.iter().map(|v| v.to_string()).collect()
    }

    fn walk_of(bits: &[&str]) -> Walk {
        let vs: Vec<_> = bits
            .iter()
            .map(|s| HypercubeVertex::parse(s).unwrap())
            .collect();
        Walk::new(vs[0].dim(), vs)
    }

    #[test]
    fn gray_code_points() {
        assert_eq!(gray_code(0, 3).unwrap().to_string(), "000");
        assert_eq!(gray_code(3, 3).unwrap().to_string(), "010");
        assert_eq!(gray_code(7, 3).unwrap().to_string(), "100");
        assert_eq!(
            gray_code(8, 3),
            Err(ScheduleError::Index { index: 8, dim: 3 })
        );
        assert_eq!(gray_code(0, 0), Err(ScheduleError::Dimension(0)));
        assert_eq!(gray_code(0, 25), Err(ScheduleError::Dimension(25)));
    }

    #[test]
    fn gray_cycles_small() {
        assert_eq!(
            labels(&gray_cycle(3).unwrap()),
            ["000", "001", "011", "010", "110", "111", "101", "100"]
        );
        assert_eq!(labels(&gray_cycle(1).unwrap()), ["0", "1"]);
        assert_eq!(labels(&gray_cycle(2).unwrap()), ["00", "01", "11", "10"]);
    }

    #[test]
    fn validate_examples() {
        let r = validate_walk(&gray_cycle(3).unwrap(), true).unwrap();
        assert!(r.valid());
        assert_eq!(r.period, 8);

        let mut truncated = gray_cycle(3).unwrap();
        truncated.vertices.pop();
        let r = validate_walk(&truncated, false).unwrap();
        assert!(r.atomic && r.unique && !r.complete);
        // closing 101 -> 000 is two bits apart
        assert!(!validate_walk(&truncated, true).unwrap().atomic);

        assert!(
            !validate_walk(&walk_of(&["000", "011"]), false)
                .unwrap()
                .atomic
        );
    }

    #[test]
    fn width_mismatch_is_an_error() {
        let w = Walk::new(
            3,
            vec![
                HypercubeVertex::parse("000").unwrap(),
                HypercubeVertex::parse("01").unwrap(),
            ],
        );
        assert_eq!(
            validate_walk(&w, false),
            Err(ScheduleError::Width {
                position: 1,
                expected: 3,
                found: 2
            })
        );
    }

    #[test]
    fn parse_rejects_non_bits() {
        assert!(HypercubeVertex::parse("01x").is_err());
        assert!(HypercubeVertex::parse("").is_err());
        assert_eq!(HypercubeVertex::parse("101").unwrap().bits(), 5);
    }

    #[test]
    fn minimal_periods() {
        assert_eq!(minimal_period(3).unwrap(), 8);
        assert_eq!(minimal_period(1).unwrap(), 2);
        assert_eq!(minimal_period(10).unwrap(), 1024);
        assert!(minimal_period(0).is_err());
    }

    #[test]
    fn hypercube_counts() {
        let q3 = hypercube_graph(3).unwrap();
        assert_eq!(q3.node_count(), 8);
        assert_eq!(q3.edge_count(), 12);
        for d in 1..=6 {
            let q = hypercube_graph(d).unwrap();
            assert_eq!(q.node_count(), 1 << d);
            assert_eq!(q.edge_count(), (d as usize) << (d - 1));
        }
    }

    #[test]
    fn gray_trace_shapes() {
        let t = walk_to_trace(&gray_cycle(3).unwrap(), 1, Quantum::UNIT, true).unwrap();
        assert_eq!(t.len(), 8);
        assert_eq!(t.graph().edge_count(), 12);
        assert_eq!(t.events()[7], Event::post("100", "000", 1));

        let t = walk_to_trace(&gray_cycle(1).unwrap(), 1, Quantum::UNIT, false).unwrap();
        assert_eq!(t.len(), 1);

        assert!(matches!(
            walk_to_trace(&walk_of(&["000", "011"]), 1, Quantum::UNIT, false),
            Err(ScheduleError::NotAdjacent { step: 0, .. })
        ));
        assert_eq!(
            walk_to_trace(&gray_cycle(2).unwrap(), 0, Quantum::UNIT, true),
            Err(ScheduleError::ZeroMagnitude)
        );
    }

    #[test]
    fn scan_rows() {
        let rows = dimension_scan(6).unwrap();
        let lcms: Vec<u128> = rows.iter().map(|r| r.lcm).collect();
        assert_eq!(lcms, [90, 180, 360, 720, 1440, 2880]);
        assert_eq!(surviving_dimensions(&rows, false), [3]);
        assert_eq!(surviving_dimensions(&rows, true), [3]);
        let disagree: Vec<u32> = rows
            .iter()
            .filter(|r| !r.closed_form_agrees())
            .map(|r| r.dim)
            .collect();
        assert_eq!(disagree, [1, 2]);
        assert!(dimension_scan(0).is_err());
    }
}
