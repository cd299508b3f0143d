//! Unit routing of a vertex set to the terminals by integral max-flow on the
//! auxiliary graph `G*`: `G` plus a super source feeding every terminal and a
//! super sink fed by every vertex of `U`.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::graph::{CapacitatedGraph, EdgeId, GPath, VertexId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArcKind {
    /// One direction of an undirected edge of `G`.
    Edge(EdgeId),
    Source,
    Sink,
    Plain,
}

#[derive(Debug, Clone)]
struct Arc {
    to: usize,
    cap: u64,
    residual: u64,
    kind: ArcKind,
}

/// Flow network with paired arcs: arc `i` and `i ^ 1` are mutual reverses.
/// Undirected edges give both directions the full capacity.
#[derive(Debug, Clone)]
pub struct AuxGraph {
    arcs: Vec<Arc>,
    adj: Vec<Vec<usize>>,
}

impl AuxGraph {
    pub fn new(nodes: usize) -> Self {
        AuxGraph {
            arcs: Vec::new(),
            adj: vec![Vec::new(); nodes],
        }
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    fn push_pair(&mut self, u: usize, v: usize, fwd: u64, back: u64, kind: ArcKind) -> usize {
        let id = self.arcs.len();
        self.arcs.push(Arc {
            to: v,
            cap: fwd,
            residual: fwd,
            kind,
        });
        self.arcs.push(Arc {
            to: u,
            cap: back,
            residual: back,
            kind,
        });
        self.adj[u].push(id);
        self.adj[v].push(id + 1);
        id
    }

    pub fn add_edge(&mut self, u: usize, v: usize, cap: u64) -> usize {
        self.push_pair(u, v, cap, cap, ArcKind::Plain)
    }

    pub fn add_arc(&mut self, u: usize, v: usize, cap: u64) -> usize {
        self.push_pair(u, v, cap, 0, ArcKind::Plain)
    }

    fn add_labeled(&mut self, u: usize, v: usize, cap: u64, undirected: bool, kind: ArcKind) -> usize {
        self.push_pair(u, v, cap, if undirected { cap } else { 0 }, kind)
    }

    /// Net flow pushed along arc `i` in its own direction (may be negative).
    fn net(&self, i: usize) -> i128 {
        self.arcs[i].cap as i128 - self.arcs[i].residual as i128
    }

    fn reset(&mut self) {
        for a in &mut self.arcs {
            a.residual = a.cap;
        }
    }

    /// Dinic's blocking-flow algorithm; residuals are left in place.
    pub fn max_flow(&mut self, s: usize, t: usize) -> u64 {
        if s == t {
            return 0;
        }
        let n = self.node_count();
        let mut level = vec![u32::MAX; n];
        let mut iter = vec![0usize; n];
        let mut total = 0u64;
        loop {
            level.iter_mut().for_each(|l| *l = u32::MAX);
            level[s] = 0;
            let mut queue = VecDeque::from([s]);
            while let Some(x) = queue.pop_front() {
                for &a in &self.adj[x] {
                    let arc = &self.arcs[a];
                    if arc.residual > 0 && level[arc.to] == u32::MAX {
                        level[arc.to] = level[x] + 1;
                        queue.push_back(arc.to);
                    }
                }
            }
            if level[t] == u32::MAX {
                return total;
            }
            iter.iter_mut().for_each(|i| *i = 0);
            loop {
                let pushed = self.augment(s, t, u64::MAX, &level, &mut iter);
                if pushed == 0 {
                    break;
                }
                total += pushed;
            }
        }
    }

    // Iterative DFS along the level graph with current-arc pointers.
    fn augment(&mut self, s: usize, t: usize, limit: u64, level: &[u32], iter: &mut [usize]) -> u64 {
        let mut stack: Vec<usize> = Vec::new();
        let mut x = s;
        loop {
            if x == t {
                let f = stack.iter().map(|&a| self.arcs[a].residual).min().unwrap_or(limit).min(limit);
                for &a in &stack {
                    self.arcs[a].residual -= f;
                    self.arcs[a ^ 1].residual += f;
                }
                return f;
            }
            let mut advanced = false;
            while iter[x] < self.adj[x].len() {
                let a = self.adj[x][iter[x]];
                let arc = &self.arcs[a];
                if arc.residual > 0 && level[arc.to] == level[x] + 1 {
                    stack.push(a);
                    x = arc.to;
                    advanced = true;
                    break;
                }
                iter[x] += 1;
            }
            if !advanced {
                // dead end: retreat and skip the arc that led here
                let Some(a) = stack.pop() else {
                    return 0;
                };
                x = self.arcs[a ^ 1].to;
                iter[x] += 1;
            }
        }
    }

    /// Nodes reachable from `s` in the residual network.
    pub fn residual_reachable(&self, s: usize) -> Vec<bool> {
        let mut seen = vec![false; self.node_count()];
        seen[s] = true;
        let mut queue = VecDeque::from([s]);
        while let Some(x) = queue.pop_front() {
            for &a in &self.adj[x] {
                let arc = &self.arcs[a];
                if arc.residual > 0 && !seen[arc.to] {
                    seen[arc.to] = true;
                    queue.push_back(arc.to);
                }
            }
        }
        seen
    }

    /// Capacity of arcs leaving the node set `side`.
    pub fn cut_capacity(&self, side: &[bool]) -> u64 {
        (0..self.node_count())
            .filter(|&x| side[x])
            .flat_map(|x| self.adj[x].iter())
            .filter(|&&a| !side[self.arcs[a].to])
            .map(|&a| self.arcs[a].cap)
            .sum()
    }
}

/// Max-flow value from `s` to `t` on a fresh copy.
pub fn max_flow_value(g: &AuxGraph, s: usize, t: usize) -> u64 {
    let mut h = g.clone();
    h.reset();
    h.max_flow(s, t)
}

pub const MINCUT_BRUTE_LIMIT: usize = 14;

/// Exact minimum s-t cut by enumerating every source side.
pub fn mincut_brute_oracle(g: &AuxGraph, s: usize, t: usize) -> Result<u64> {
    let n = g.node_count();
    if n > MINCUT_BRUTE_LIMIT {
        return Err(Error::TooLarge {
            what: "auxiliary graph nodes for cut enumeration",
            got: n,
            limit: MINCUT_BRUTE_LIMIT,
        });
    }
    if s == t || s >= n || t >= n {
        return Err(Error::InvalidInput("source and sink must be distinct nodes".into()));
    }
    let free: Vec<usize> = (0..n).filter(|&x| x != s && x != t).collect();
    let mut best = u64::MAX;
    let mut side = vec![false; n];
    for mask in 0u32..(1 << free.len()) {
        side.iter_mut().for_each(|b| *b = false);
        side[s] = true;
        for (i, &x) in free.iter().enumerate() {
            side[x] = mask >> i & 1 == 1;
        }
        best = best.min(g.cut_capacity(&side));
    }
    Ok(best)
}

/// Source side of a minimum cut, in `G*` node ids (`n` = s*, `n + 1` = t*).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CutWitness {
    pub source_side: Vec<usize>,
    pub capacity: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TerminalRouting {
    /// One entry per vertex of `U`, in input order: a walk from it to a terminal.
    pub paths: Vec<Option<GPath>>,
    /// Number of paths through each edge of `G`.
    pub edge_usage: Vec<u64>,
    pub flow: u64,
    pub witness: Option<CutWitness>,
}

impl TerminalRouting {
    pub fn is_complete(&self) -> bool {
        self.witness.is_none()
    }

    pub fn unrouted(&self) -> usize {
        self.paths.iter().filter(|p| p.is_none()).count()
    }
}

/// Routes every vertex of `set` to some terminal, one unit each, within the
/// edge capacities of `g`. Terminals in `set` route to themselves.
pub fn route_to_terminals(g: &CapacitatedGraph, set: &[VertexId]) -> Result<TerminalRouting> {
    let n = g.n();
    let is_terminal = g.terminal_mask();
    let mut in_set = vec![false; n];
    for &u in set {
        if u >= n {
            return Err(Error::VertexOutOfRange { vertex: u, n });
        }
        if std::mem::replace(&mut in_set[u], true) {
            return Err(Error::InvalidInput(format!("vertex {u} listed twice")));
        }
    }
    if g.terminals().is_empty() && set.iter().any(|&u| !is_terminal[u]) {
        return Err(Error::InvalidInput("no terminals to route to".into()));
    }
    let (s, t) = (n, n + 1);
    let pending: Vec<VertexId> = set.iter().copied().filter(|&u| !is_terminal[u]).collect();
    let mut aux = AuxGraph::new(n + 2);
    for e in g.edges() {
        aux.add_labeled(e.u, e.v, e.cap, true, ArcKind::Edge(e.id));
    }
    let source_cap = pending.len() as u64 + 1;
    for &x in g.terminals() {
        aux.add_labeled(s, x, source_cap, false, ArcKind::Source);
    }
    let mut sink_arc = vec![None; n];
    for &u in &pending {
        sink_arc[u] = Some(aux.add_labeled(u, t, 1, false, ArcKind::Sink));
    }
    let flow = aux.max_flow(s, t);

    let witness = (flow < pending.len() as u64).then(|| {
        let side = aux.residual_reachable(s);
        CutWitness {
            capacity: aux.cut_capacity(&side),
            source_side: (0..n + 2).filter(|&x| side[x]).collect(),
        }
    });

    let mut by_vertex: Vec<Option<GPath>> = vec![None; n];
    for (u, path) in decompose(&aux, s, t, &sink_arc, flow) {
        by_vertex[u] = Some(path);
    }
    for &u in set.iter().filter(|&&u| is_terminal[u]) {
        by_vertex[u] = Some(GPath::trivial(u));
    }
    let mut edge_usage = vec![0u64; g.edge_count()];
    let paths: Vec<Option<GPath>> = set.iter().map(|&u| by_vertex[u].take()).collect();
    for p in paths.iter().flatten() {
        for &e in &p.edges {
            edge_usage[e] += 1;
        }
    }
    Ok(TerminalRouting {
        paths,
        edge_usage,
        flow,
        witness,
    })
}

// Splits the integral flow into unit s*-t* paths. From each node the sink arc
// is preferred, then arcs in edge-id order; cycles met on the way are cancelled.
fn decompose(aux: &AuxGraph, s: usize, t: usize, sink_arc: &[Option<usize>], flow: u64) -> Vec<(VertexId, GPath)> {
    let mut pos: Vec<u64> = (0..aux.arcs.len()).map(|a| aux.net(a).max(0) as u64).collect();
    let mut ptr = vec![0usize; aux.node_count()];
    let mut on_path = vec![usize::MAX; aux.node_count()];
    let mut out = Vec::with_capacity(flow as usize);
    for _ in 0..flow {
        let mut nodes = vec![s];
        let mut arcs: Vec<usize> = Vec::new();
        on_path[s] = 0;
        let mut x = s;
        while x != t {
            let next = match sink_arc.get(x).copied().flatten() {
                Some(a) if pos[a] > 0 => a,
                _ => loop {
                    let a = aux.adj[x][ptr[x]];
                    if pos[a] > 0 {
                        break a;
                    }
                    ptr[x] += 1;
                },
            };
            let y = aux.arcs[next].to;
            if on_path[y] != usize::MAX {
                let j = on_path[y];
                pos[next] -= 1;
                for &a in &arcs[j..] {
                    pos[a] -= 1;
                }
                for &z in &nodes[j + 1..] {
                    on_path[z] = usize::MAX;
                }
                nodes.truncate(j + 1);
                arcs.truncate(j);
                x = y;
                continue;
            }
            on_path[y] = nodes.len();
            nodes.push(y);
            arcs.push(next);
            x = y;
        }
        for &a in &arcs {
            pos[a] -= 1;
        }
        for &z in &nodes {
            on_path[z] = usize::MAX;
        }
        // nodes = s*, terminal, ..., u, t*
        let u = nodes[nodes.len() - 2];
        let vertices: Vec<VertexId> = nodes[1..nodes.len() - 1].iter().rev().copied().collect();
        let edges: Vec<EdgeId> = arcs[1..arcs.len() - 1]
            .iter()
            .rev()
            .map(|&a| match aux.arcs[a].kind {
                ArcKind::Edge(e) => e,
                _ => unreachable!("interior arcs are graph edges"),
            })
            .collect();
        out.push((u, GPath { vertices, edges }));
    }
    out
}
