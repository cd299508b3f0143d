use std::collections::BTreeMap;

use num_traits::{Signed, ToPrimitive, Zero};

use super::{CapacitatedGraph, ContractedGraph, VertexId};
use crate::error::{Error, Result};
use crate::Rational;

/// Nonnegative rational demand on unordered terminal pairs, keyed `(min, max)`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Demand {
    entries: BTreeMap<(VertexId, VertexId), Rational>,
}

impl Demand {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    fn key(t: VertexId, u: VertexId) -> (VertexId, VertexId) {
        (t.min(u), t.max(u))
    }

    /// Adds `value` to the pair `{t, u}`; zero entries are not stored.
    pub fn add(&mut self, t: VertexId, u: VertexId, value: Rational) -> Result<()> {
        if t == u {
            return Err(Error::InvalidInput(format!("self-pair demand at terminal {t}")));
        }
        if value.is_negative() {
            return Err(Error::InvalidInput(format!("negative demand {value} on ({t}, {u})")));
        }
        if value.is_zero() {
            return Ok(());
        }
        *self.entries.entry(Self::key(t, u)).or_insert_with(Rational::zero) += value;
        Ok(())
    }

    pub fn get(&self, t: VertexId, u: VertexId) -> Rational {
        self.entries.get(&Self::key(t, u)).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(VertexId, VertexId), &Rational)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total(&self) -> Rational {
        self.entries.values().cloned().sum()
    }

    pub fn scaled(&self, factor: &Rational) -> Demand {
        let mut out = Demand::new();
        for (&(t, u), v) in &self.entries {
            // factor >= 0 is the caller's contract; add() rejects negatives.
            let _ = out.add(t, u, v * factor);
        }
        out
    }

    pub fn merge(&mut self, other: &Demand) {
        for (&(t, u), v) in &other.entries {
            *self.entries.entry((t, u)).or_insert_with(Rational::zero) += v;
        }
    }

    /// Distinct terminals that appear in some pair, ascending.
    pub fn support(&self) -> Vec<VertexId> {
        let mut v: Vec<VertexId> = self.entries.keys().flat_map(|&(a, b)| [a, b]).collect();
        v.sort_unstable();
        v.dedup();
        v
    }
}

/// One path of a path-based flow. `pair` names the commodity (terminal ids);
/// `nodes`/`edges` live in the id space of the network being routed in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowPath {
    pub pair: (VertexId, VertexId),
    pub nodes: Vec<usize>,
    pub edges: Vec<usize>,
    pub value: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PathFlow {
    pub paths: Vec<FlowPath>,
}

impl PathFlow {
    /// Exact per-edge loads, validating that each path is a walk in `net`
    /// joining the supernodes of its commodity's terminals.
    pub fn edge_loads<N: FlowNetwork + ?Sized>(&self, net: &N) -> Result<Vec<Rational>> {
        let mut load = vec![Rational::zero(); net.edge_count()];
        for (i, p) in self.paths.iter().enumerate() {
            if !p.value.is_positive() {
                return Err(Error::InvalidInput(format!("path {i} carries non-positive value")));
            }
            if p.nodes.len() != p.edges.len() + 1 {
                return Err(Error::InvalidInput(format!("path {i} has mismatched node/edge lists")));
            }
            let (s, t) = (net.terminal_node(p.pair.0), net.terminal_node(p.pair.1));
            let (Some(s), Some(t)) = (s, t) else {
                return Err(Error::InvalidInput(format!("path {i}: commodity {:?} is not a terminal pair", p.pair)));
            };
            let (first, last) = (p.nodes[0], *p.nodes.last().unwrap());
            if !((first == s && last == t) || (first == t && last == s)) {
                return Err(Error::InvalidInput(format!("path {i} does not join its commodity's endpoints")));
            }
            for (hop, &e) in p.edges.iter().enumerate() {
                if e >= net.edge_count() {
                    return Err(Error::InvalidInput(format!("path {i} uses nonexistent edge {e}")));
                }
                let (a, b) = net.endpoints(e);
                let (x, y) = (p.nodes[hop], p.nodes[hop + 1]);
                if !((a == x && b == y) || (a == y && b == x)) {
                    return Err(Error::InvalidInput(format!("path {i}: edge {e} does not join {x} and {y}")));
                }
                load[e] += &p.value;
            }
        }
        Ok(load)
    }

    /// Total routed per unordered commodity.
    pub fn routed(&self) -> BTreeMap<(VertexId, VertexId), Rational> {
        let mut out: BTreeMap<_, Rational> = BTreeMap::new();
        for p in &self.paths {
            let k = (p.pair.0.min(p.pair.1), p.pair.0.max(p.pair.1));
            *out.entry(k).or_insert_with(Rational::zero) += &p.value;
        }
        out
    }
}

/// Read access shared by every network a flow can be routed in.
pub trait FlowNetwork {
    fn node_count(&self) -> usize;
    fn edge_count(&self) -> usize;
    fn endpoints(&self, e: usize) -> (usize, usize);
    fn capacity(&self, e: usize) -> Rational;
    /// Node hosting terminal `t`, `None` if `t` is not a terminal.
    fn terminal_node(&self, t: VertexId) -> Option<usize>;

    fn capacity_f64(&self, e: usize) -> f64 {
        self.capacity(e).to_f64().unwrap_or(f64::INFINITY)
    }
}

impl FlowNetwork for CapacitatedGraph {
    fn node_count(&self) -> usize {
        self.n()
    }
    fn edge_count(&self) -> usize {
        CapacitatedGraph::edge_count(self)
    }
    fn endpoints(&self, e: usize) -> (usize, usize) {
        let e = self.edge(e);
        (e.u, e.v)
    }
    fn capacity(&self, e: usize) -> Rational {
        Rational::from_integer(self.edge(e).cap.into())
    }
    fn capacity_f64(&self, e: usize) -> f64 {
        self.edge(e).cap as f64
    }
    fn terminal_node(&self, t: VertexId) -> Option<usize> {
        self.terminals().contains(&t).then_some(t)
    }
}

impl FlowNetwork for ContractedGraph {
    fn node_count(&self) -> usize {
        ContractedGraph::node_count(self)
    }
    fn edge_count(&self) -> usize {
        self.superedges().len()
    }
    fn endpoints(&self, e: usize) -> (usize, usize) {
        let s = &self.superedges()[e];
        (s.a, s.b)
    }
    fn capacity(&self, e: usize) -> Rational {
        Rational::from_integer(self.superedges()[e].cap.into())
    }
    fn capacity_f64(&self, e: usize) -> f64 {
        self.superedges()[e].cap as f64
    }
    fn terminal_node(&self, t: VertexId) -> Option<usize> {
        self.terminals()
            .iter()
            .position(|&x| x == t)
            .map(|i| self.terminal_nodes()[i])
    }
}
