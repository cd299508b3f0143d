use super::{CapacitatedGraph, ClusterId, VertexId};
use crate::error::{Error, Result};

/// Assignment of every vertex to one of `count` clusters, ids `0..count`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    assignment: Vec<ClusterId>,
    count: usize,
}

impl Partition {
    /// Cluster ids must be exactly `0..f` with no gaps.
    pub fn new(assignment: Vec<ClusterId>) -> Result<Self> {
        let count = assignment.iter().map(|&c| c + 1).max().unwrap_or(0);
        let mut used = vec![false; count];
        for &c in &assignment {
            used[c] = true;
        }
        if let Some(gap) = used.iter().position(|&u| !u) {
            return Err(Error::InvalidInput(format!("cluster id {gap} is unused")));
        }
        Ok(Partition { assignment, count })
    }

    /// Relabels arbitrary cluster labels to dense ids in first-appearance order.
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut map = std::collections::HashMap::new();
        let assignment = labels
            .iter()
            .map(|l| {
                let next = map.len();
                *map.entry(*l).or_insert(next)
            })
            .collect();
        let count = map.len();
        Partition { assignment, count }
    }

    pub fn singleton(n: usize) -> Self {
        Partition {
            assignment: (0..n).collect(),
            count: n,
        }
    }

    pub fn whole(n: usize) -> Self {
        Partition {
            assignment: vec![0; n],
            count: usize::from(n > 0),
        }
    }

    #[inline]
    pub fn cluster_of(&self, v: VertexId) -> ClusterId {
        self.assignment[v]
    }

    #[inline]
    pub fn assignment(&self) -> &[ClusterId] {
        &self.assignment
    }

    /// f = |ℱ|
    #[inline]
    pub fn cluster_count(&self) -> usize {
        self.count
    }

    #[inline]
    pub fn vertex_count(&self) -> usize {
        self.assignment.len()
    }

    /// Members per cluster, each list ascending.
    pub fn members(&self) -> Vec<Vec<VertexId>> {
        let mut out = vec![Vec::new(); self.count];
        for (v, &c) in self.assignment.iter().enumerate() {
            out[c].push(v);
        }
        out
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut out = vec![0; self.count];
        for &c in &self.assignment {
            out[c] += 1;
        }
        out
    }
}

/// `Err((t, t'))` with the lexicographically first pair of terminal positions
/// that share a cluster.
pub fn validate_partition(g: &CapacitatedGraph, p: &Partition) -> std::result::Result<(), (VertexId, VertexId)> {
    let terminals = g.terminals();
    let mut first: Vec<Option<usize>> = vec![None; p.cluster_count()];
    let mut best: Option<(usize, usize)> = None;
    for (j, &t) in terminals.iter().enumerate() {
        let c = p.cluster_of(t);
        match first[c] {
            None => first[c] = Some(j),
            Some(i) => {
                if best.is_none_or(|(bi, bj)| (i, j) < (bi, bj)) {
                    best = Some((i, j));
                }
            }
        }
    }
    match best {
        None => Ok(()),
        Some((i, j)) => Err((terminals[i], terminals[j])),
    }
}
