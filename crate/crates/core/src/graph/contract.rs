use std::collections::HashMap;

use super::{CapacitatedGraph, ClusterId, EdgeId, Partition, VertexId};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Superedge {
    pub id: usize,
    /// Lower cluster id.
    pub a: ClusterId,
    pub b: ClusterId,
    pub cap: u64,
}

/// The graph H obtained by contracting every cluster into a supernode.
///
/// Parallel superedges are merged: one superedge per adjacent cluster pair,
/// carrying the summed capacity and the list of original edges behind it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContractedGraph {
    f: usize,
    superedges: Vec<Superedge>,
    backmap: Vec<Vec<EdgeId>>,
    edge_to_super: Vec<Option<usize>>,
    lookup: HashMap<(ClusterId, ClusterId), usize>,
    terminal_nodes: Vec<ClusterId>,
    terminals: Vec<VertexId>,
    assignment: Vec<ClusterId>,
}

pub fn contract(g: &CapacitatedGraph, p: &Partition) -> Result<ContractedGraph> {
    if p.vertex_count() != g.n() {
        return Err(Error::PartitionSize {
            expected: g.n(),
            got: p.vertex_count(),
        });
    }
    let mut crossing: Vec<(ClusterId, ClusterId, EdgeId)> = g
        .edges()
        .iter()
        .filter_map(|e| {
            let (x, y) = (p.cluster_of(e.u), p.cluster_of(e.v));
            (x != y).then(|| (x.min(y), x.max(y), e.id))
        })
        .collect();
    crossing.sort_unstable();

    let mut superedges: Vec<Superedge> = Vec::new();
    let mut backmap: Vec<Vec<EdgeId>> = Vec::new();
    let mut edge_to_super = vec![None; g.edge_count()];
    let mut lookup = HashMap::new();
    for (a, b, eid) in crossing {
        let sid = match superedges.last() {
            Some(last) if last.a == a && last.b == b => last.id,
            _ => {
                let id = superedges.len();
                superedges.push(Superedge { id, a, b, cap: 0 });
                backmap.push(Vec::new());
                lookup.insert((a, b), id);
                id
            }
        };
        superedges[sid].cap += g.edge(eid).cap;
        backmap[sid].push(eid);
        edge_to_super[eid] = Some(sid);
    }
    Ok(ContractedGraph {
        f: p.cluster_count(),
        superedges,
        backmap,
        edge_to_super,
        lookup,
        terminal_nodes: g.terminals().iter().map(|&t| p.cluster_of(t)).collect(),
        terminals: g.terminals().to_vec(),
        assignment: p.assignment().to_vec(),
    })
}

impl ContractedGraph {
    #[inline]
    pub fn node_count(&self) -> usize {
        self.f
    }

    #[inline]
    pub fn superedges(&self) -> &[Superedge] {
        &self.superedges
    }

    #[inline]
    pub fn backmap(&self, sid: usize) -> &[EdgeId] {
        &self.backmap[sid]
    }

    /// Superedge carrying original edge `e`, `None` for intra-cluster edges.
    #[inline]
    pub fn superedge_of_edge(&self, e: EdgeId) -> Option<usize> {
        self.edge_to_super[e]
    }

    pub fn superedge_between(&self, x: ClusterId, y: ClusterId) -> Option<usize> {
        self.lookup.get(&(x.min(y), x.max(y))).copied()
    }

    /// Supernode of each terminal, in terminal order.
    pub fn terminal_nodes(&self) -> &[ClusterId] {
        &self.terminal_nodes
    }

    pub fn terminals(&self) -> &[VertexId] {
        &self.terminals
    }

    #[inline]
    pub fn cluster_of(&self, v: VertexId) -> ClusterId {
        self.assignment[v]
    }

    pub fn total_capacity(&self) -> u128 {
        self.superedges.iter().map(|s| s.cap as u128).sum()
    }
}

/// A walk in H: supernodes plus the superedge consumed at each hop.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct HPath {
    pub nodes: Vec<ClusterId>,
    pub superedges: Vec<usize>,
}

impl HPath {
    pub fn trivial(c: ClusterId) -> Self {
        HPath {
            nodes: vec![c],
            superedges: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.superedges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.superedges.is_empty()
    }

    pub fn reversed(&self) -> Self {
        let mut r = self.clone();
        r.nodes.reverse();
        r.superedges.reverse();
        r
    }

    /// Appends `other`, which must start where `self` ends.
    pub fn extend(&mut self, other: &HPath) {
        debug_assert_eq!(self.nodes.last(), other.nodes.first());
        self.nodes.extend_from_slice(&other.nodes[1..]);
        self.superedges.extend_from_slice(&other.superedges);
    }
}

/// Maps a walk of G through F(·), dropping hops that stay inside a cluster.
pub fn induce_path(walk: &[VertexId], h: &ContractedGraph) -> Result<HPath> {
    let Some(&first) = walk.first() else {
        return Ok(HPath::default());
    };
    let mut out = HPath::trivial(h.cluster_of(first));
    for &v in &walk[1..] {
        let cur = *out.nodes.last().unwrap();
        let next = h.cluster_of(v);
        if next == cur {
            continue;
        }
        let sid = h
            .superedge_between(cur, next)
            .ok_or_else(|| Error::InvalidInput(format!("walk hops between non-adjacent clusters {cur} and {next}")))?;
        out.nodes.push(next);
        out.superedges.push(sid);
    }
    Ok(out)
}
