//! Capacitated multigraphs and the partitions used to contract them.
//!
//! Every identifier is a dense 0-based index. Edge ids are positions in the
//! edge list and are stable for the lifetime of a graph; parallel edges are
//! distinguished only by id.

mod contract;
mod flow;
mod partition;

use std::collections::VecDeque;

pub use contract::{contract, induce_path, ContractedGraph, HPath, Superedge};
pub use flow::{Demand, FlowNetwork, FlowPath, PathFlow};
pub use partition::{validate_partition, Partition};

use crate::error::{Error, Result};

pub type VertexId = usize;
pub type EdgeId = usize;
pub type ClusterId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Edge {
    pub id: EdgeId,
    pub u: VertexId,
    pub v: VertexId,
    pub cap: u64,
}

impl Edge {
    /// The endpoint opposite to `x`.
    #[inline]
    pub fn other(&self, x: VertexId) -> VertexId {
        if x == self.u {
            self.v
        } else {
            self.u
        }
    }
}

/// Undirected multigraph with integer capacities and an ordered terminal set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CapacitatedGraph {
    n: usize,
    edges: Vec<Edge>,
    terminals: Vec<VertexId>,
    // (neighbor, edge id), ascending by edge id
    adj: Vec<Vec<(VertexId, EdgeId)>>,
}

impl CapacitatedGraph {
    /// Builds a graph from `(u, v, cap)` triples; edge ids follow slice order.
    pub fn new(n: usize, edges: &[(VertexId, VertexId, u64)], terminals: Vec<VertexId>) -> Result<Self> {
        let mut adj = vec![Vec::new(); n];
        let mut list = Vec::with_capacity(edges.len());
        for (id, &(u, v, cap)) in edges.iter().enumerate() {
            for x in [u, v] {
                if x >= n {
                    return Err(Error::VertexOutOfRange { vertex: x, n });
                }
            }
            if u == v {
                return Err(Error::InvalidInput(format!("edge {id} is a self-loop at {u}")));
            }
            adj[u].push((v, id));
            adj[v].push((u, id));
            list.push(Edge { id, u, v, cap });
        }
        let mut g = CapacitatedGraph {
            n,
            edges: list,
            terminals: Vec::new(),
            adj,
        };
        g.set_terminals(terminals)?;
        Ok(g)
    }

    pub fn set_terminals(&mut self, terminals: Vec<VertexId>) -> Result<()> {
        let mut seen = vec![false; self.n];
        for &t in &terminals {
            if t >= self.n {
                return Err(Error::VertexOutOfRange { vertex: t, n: self.n });
            }
            if std::mem::replace(&mut seen[t], true) {
                return Err(Error::InvalidInput(format!("duplicate terminal {t}")));
            }
        }
        self.terminals = terminals;
        Ok(())
    }

    pub fn with_terminals(mut self, terminals: Vec<VertexId>) -> Result<Self> {
        self.set_terminals(terminals)?;
        Ok(self)
    }

    /// Same topology with replaced capacities.
    pub fn with_capacities(&self, caps: &[u64]) -> Result<Self> {
        if caps.len() != self.edges.len() {
            return Err(Error::InvalidInput(format!(
                "{} capacities for {} edges",
                caps.len(),
                self.edges.len()
            )));
        }
        let mut g = self.clone();
        for (e, &c) in g.edges.iter_mut().zip(caps) {
            e.cap = c;
        }
        Ok(g)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    #[inline]
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    #[inline]
    pub fn edge(&self, id: EdgeId) -> &Edge {
        &self.edges[id]
    }

    #[inline]
    pub fn terminals(&self) -> &[VertexId] {
        &self.terminals
    }

    pub fn terminal_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.n];
        for &t in &self.terminals {
            mask[t] = true;
        }
        mask
    }

    /// Incident `(neighbor, edge id)` pairs in ascending edge-id order.
    #[inline]
    pub fn neighbors(&self, v: VertexId) -> &[(VertexId, EdgeId)] {
        &self.adj[v]
    }

    /// Degree counting parallel edges.
    #[inline]
    pub fn degree(&self, v: VertexId) -> usize {
        self.adj[v].len()
    }

    /// c(E), the exact sum of all capacities.
    pub fn total_capacity(&self) -> u128 {
        self.edges.iter().map(|e| e.cap as u128).sum()
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        bfs_from(self, &[0]).iter().all(Option::is_some)
    }
}

/// Unweighted multi-source BFS; `None` marks unreachable vertices.
pub fn bfs_distances(g: &CapacitatedGraph, sources: &[VertexId]) -> Result<Vec<Option<u32>>> {
    if sources.is_empty() {
        return Err(Error::InvalidInput("bfs needs at least one source".into()));
    }
    if let Some(&s) = sources.iter().find(|&&s| s >= g.n()) {
        return Err(Error::VertexOutOfRange { vertex: s, n: g.n() });
    }
    Ok(bfs_from(g, sources))
}

pub(crate) fn bfs_from(g: &CapacitatedGraph, sources: &[VertexId]) -> Vec<Option<u32>> {
    let mut dist = vec![None; g.n()];
    let mut queue = VecDeque::with_capacity(g.n());
    for &s in sources {
        if dist[s].is_none() {
            dist[s] = Some(0);
            queue.push_back(s);
        }
    }
    while let Some(x) = queue.pop_front() {
        let dx = dist[x].unwrap();
        for &(y, _) in g.neighbors(x) {
            if dist[y].is_none() {
                dist[y] = Some(dx + 1);
                queue.push_back(y);
            }
        }
    }
    dist
}

/// A walk in `G` with the edge chosen at every hop.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GPath {
    pub vertices: Vec<VertexId>,
    pub edges: Vec<EdgeId>,
}

impl GPath {
    pub fn trivial(v: VertexId) -> Self {
        GPath {
            vertices: vec![v],
            edges: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn start(&self) -> VertexId {
        self.vertices[0]
    }

    pub fn end(&self) -> VertexId {
        *self.vertices.last().unwrap()
    }

    pub fn reversed(&self) -> Self {
        let mut r = self.clone();
        r.vertices.reverse();
        r.edges.reverse();
        r
    }
}
