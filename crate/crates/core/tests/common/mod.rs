//! Shared generators and independent oracles for the integration tests.

#![allow(dead_code)]

use ledger_kernel::ledger::{Event, LedgerState, Quantum, Trace};
use ledger_kernel::potential::Potential;
use ledger_kernel::{EdgeFlow, NodeId, RecognitionGraph};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn label(i: usize) -> NodeId {
    NodeId::new(format!("n{i:02}"))
}

/// Connected graph on `2..=max_nodes` nodes: a random spanning tree plus a
/// random number of extra edges. Input order is shuffled.
pub fn connected_graph(rng: &mut impl Rng, max_nodes: usize) -> RecognitionGraph {
    let n = rng.gen_range(2..=max_nodes);
    let mut edges = Vec::new();
    for v in 1..n {
        let u = rng.gen_range(0..v);
        edges.push((label(u), label(v)));
    }
    let extra = rng.gen_range(0..=n * (n - 1) / 2);
    for _ in 0..extra {
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        if u != v {
            edges.push((label(u), label(v)));
        }
    }
    edges.shuffle(rng);
    let mut nodes: Vec<NodeId> = (0..n).map(label).collect();
    nodes.shuffle(rng);
    RecognitionGraph::build(nodes, edges).unwrap()
}

/// Graph on `1..=max_nodes` nodes that may be disconnected.
pub fn any_graph(rng: &mut impl Rng, max_nodes: usize) -> RecognitionGraph {
    let n = rng.gen_range(1..=max_nodes);
    let density: f64 = rng.gen_range(0.0..0.7);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(density) {
                edges.push((label(u), label(v)));
            }
        }
    }
    RecognitionGraph::build((0..n).map(label), edges).unwrap()
}

/// Random trace with at least one edge; about one tick in five is empty.
pub fn trace(rng: &mut impl Rng, max_nodes: usize, max_ticks: usize) -> Trace {
    let g = connected_graph(rng, max_nodes);
    let pairs: Vec<(NodeId, NodeId)> = g
        .undirected_edges()
        .map(|(u, v)| (u.clone(), v.clone()))
        .collect();
    let ticks = rng.gen_range(0..=max_ticks);
    let mut events = Vec::with_capacity(ticks);
    for _ in 0..ticks {
        if rng.gen_bool(0.2) {
            events.push(Event::Empty);
            continue;
        }
        let (u, v) = pairs.choose(rng).unwrap().clone();
        let (from, to) = if rng.gen_bool(0.5) { (u, v) } else { (v, u) };
        let mut k = rng.gen_range(-5i64..=5);
        if k == 0 {
            k = 1;
        }
        events.push(Event::Post {
            from,
            to,
            magnitude: k,
        });
    }
    let init = g
        .nodes()
        .iter()
        .map(|n| (n.clone(), rng.gen_range(-1000i64..=1000)))
        .collect::<Vec<_>>();
    let initial =
        LedgerState::with_balances(&g, Quantum::new(1, rng.gen_range(1..=4)).unwrap(), init)
            .unwrap();
    Trace::new(g, initial, events).unwrap()
}

pub fn random_flow<'g>(g: &'g RecognitionGraph, rng: &mut impl Rng, span: i64) -> EdgeFlow<'g> {
    let mut f = EdgeFlow::zero(g);
    let pairs: Vec<(NodeId, NodeId)> = g
        .undirected_edges()
        .map(|(u, v)| (u.clone(), v.clone()))
        .collect();
    for (u, v) in pairs {
        f.set(&u, &v, rng.gen_range(-span..=span)).unwrap();
    }
    f
}

pub fn random_potential(g: &RecognitionGraph, rng: &mut impl Rng) -> Potential {
    Potential::from_values(
        g.nodes()
            .iter()
            .map(|n| (n.clone(), rng.gen_range(-50i64..=50))),
    )
}

/// Gradient of a random potential, built edge by edge without going through
/// the library's `gradient`.
pub fn closed_flow<'g>(g: &'g RecognitionGraph, rng: &mut impl Rng) -> EdgeFlow<'g> {
    let p = random_potential(g, rng);
    let mut f = EdgeFlow::zero(g);
    let pairs: Vec<(NodeId, NodeId)> = g
        .undirected_edges()
        .map(|(u, v)| (u.clone(), v.clone()))
        .collect();
    for (u, v) in pairs {
        f.set(&u, &v, p.get(&v).unwrap() - p.get(&u).unwrap())
            .unwrap();
    }
    f
}

/// Flows for closure-equivalence testing: closed, closed with one edge
/// perturbed, or fully random, in roughly equal shares.
pub fn mixed_flow<'g>(g: &'g RecognitionGraph, rng: &mut impl Rng) -> EdgeFlow<'g> {
    match rng.gen_range(0..3) {
        0 => closed_flow(g, rng),
        1 => {
            let mut f = closed_flow(g, rng);
            let pairs: Vec<(NodeId, NodeId)> = g
                .undirected_edges()
                .map(|(u, v)| (u.clone(), v.clone()))
                .collect();
            if let Some((u, v)) = pairs.choose(rng) {
                let bump = if rng.gen_bool(0.5) { 1 } else { -2 };
                f.add(u, v, bump).unwrap();
            }
            f
        }
        _ => random_flow(g, rng, 3),
    }
}

// ---------------------------------------------------------------------------
// exact rational oracles

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// `J(x) = (x + 1/x)/2 - 1` in exact arithmetic.
pub fn j_exact(x: &BigRational) -> BigRational {
    let two = BigRational::from_integer(BigInt::from(2));
    (x + x.recip()) / &two - BigRational::one()
}

/// Composition-law residual in exact arithmetic.
pub fn composition_residual_exact(x: &BigRational, y: &BigRational) -> BigRational {
    let two = BigRational::from_integer(BigInt::from(2));
    let (fx, fy) = (j_exact(x), j_exact(y));
    j_exact(&(x * y)) + j_exact(&(x / y)) - &two * &fx * &fy - &two * &fx - &two * &fy
}

/// `cosh(t) - 1 = sum_{k>=1} t^(2k)/(2k)!` for rational `t`, `terms` terms.
pub fn cosh_minus_one_series(t: &BigRational, terms: usize) -> BigRational {
    let mut sum = BigRational::zero();
    let mut term = BigRational::one();
    let t2 = t * t;
    for k in 1..=terms {
        let denom = BigInt::from((2 * k - 1) * (2 * k));
        term = term * &t2 / BigRational::from_integer(denom);
        sum += &term;
    }
    sum
}

/// `sum_{k=0}^{terms} 1/k!`, a rational approximation of e.
pub fn e_convergent(terms: usize) -> BigRational {
    let mut sum = BigRational::zero();
    let mut term = BigRational::one();
    for k in 0..=terms {
        if k > 0 {
            term /= BigRational::from_integer(BigInt::from(k));
        }
        sum += &term;
    }
    sum
}
