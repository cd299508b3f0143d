//! Typical pairs and the adversarial terminal demand.
//!
//! Each harvest iteration reclusters with the current useless set, takes a
//! far-apart pair of non-useless vertices from the purest surviving group,
//! records a shortest H⁰ path between their clusters with one supporting
//! G-edge per hop, and makes all of those endpoints useless. The pairs are
//! then routed to terminals and the resulting terminal pairs form the demand.

use std::collections::BTreeSet;

use log::warn;
use num_traits::{One, Zero};

use crate::clustering::{cluster, cluster_diameter_check, ClusterParams, ClusteringState, FriendGraph, HierarchyOutcome};
use crate::error::{Error, Result};
use crate::graph::{
    bfs_from, induce_path, CapacitatedGraph, ClusterId, ContractedGraph, Demand, EdgeId, FlowPath, GPath, HPath,
    Partition, PathFlow, VertexId,
};
use crate::io::{PairRecord, RouteRecord};
use crate::routing::{route_to_terminals, TerminalRouting};
use crate::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypicalPair {
    pub a: VertexId,
    pub b: VertexId,
    /// Shortest F(a)–F(b) path in H⁰.
    pub hpath: Vec<ClusterId>,
    /// One G-edge per hop of `hpath`.
    pub support: Vec<EdgeId>,
    pub dist_g: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HarvestAbort {
    pub iteration: usize,
    /// Hierarchy level reached, 0 when the abort was not a clustering failure.
    pub level: usize,
    pub bad_sizes: Vec<usize>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairBook {
    pub pairs: Vec<TypicalPair>,
    pub useless: Vec<bool>,
    pub abort: Option<HarvestAbort>,
    /// Bad-vertex vector b_0.. of the last clustering run.
    pub bad_sizes: Vec<usize>,
    /// Largest in-group H⁰ diameter seen per level over all iterations.
    pub max_diameters: Vec<usize>,
    /// Surviving group count per level of the last clustering run.
    pub group_counts: Vec<usize>,
    /// First iteration at which |V_U| went over the useless budget.
    pub useless_budget_exceeded_at: Option<usize>,
}

impl PairBook {
    pub fn useless_count(&self) -> usize {
        self.useless.iter().filter(|&&u| u).count()
    }

    pub fn total_distance(&self) -> u64 {
        self.pairs.iter().map(|p| p.dist_g as u64).sum()
    }

    /// All 2|𝒫| endpoints distinct and supporting sets pairwise disjoint.
    pub fn check_disjointness(&self) -> Result<()> {
        let mut ends = BTreeSet::new();
        let mut edges = BTreeSet::new();
        for (i, p) in self.pairs.iter().enumerate() {
            for v in [p.a, p.b] {
                if !ends.insert(v) {
                    return Err(Error::Invariant(format!("endpoint {v} reused by pair {i}")));
                }
            }
            for &e in &p.support {
                if !edges.insert(e) {
                    return Err(Error::Invariant(format!("supporting edge {e} reused by pair {i}")));
                }
            }
        }
        Ok(())
    }
}

/// Picks the surviving group with the largest non-useless fraction among
/// those holding at least two non-useless vertices, then u = its lowest
/// non-useless vertex and u′ = the non-useless vertex of the group farthest
/// from u in G. Returns `(u, u′, dist_G(u, u′), H⁰ path)`.
pub fn find_typical_pair(
    g: &CapacitatedGraph,
    p: &Partition,
    fg: &FriendGraph,
    state: &ClusteringState,
    useless: &[bool],
) -> Option<(VertexId, VertexId, u32, Vec<ClusterId>)> {
    let members = p.members();
    let mut best: Option<(usize, usize, usize)> = None; // (group, clean, total)
    for (gid, group) in state.family.iter().enumerate() {
        let total: usize = group.iter().map(|&c| fg.sizes[c]).sum();
        let clean: usize = group.iter().flat_map(|&c| &members[c]).filter(|&&v| !useless[v]).count();
        if clean < 2 {
            continue;
        }
        let better = match best {
            None => true,
            Some((_, bc, bt)) => clean as u128 * bt as u128 > bc as u128 * total as u128,
        };
        if better {
            best = Some((gid, clean, total));
        }
    }
    let (gid, _, _) = best?;
    let mut verts: Vec<VertexId> = state.family[gid]
        .iter()
        .flat_map(|&c| members[c].iter().copied())
        .filter(|&v| !useless[v])
        .collect();
    verts.sort_unstable();
    let u = verts[0];
    let dist = bfs_from(g, &[u]);
    let (du, v) = verts
        .iter()
        .filter_map(|&v| dist[v].map(|d| (d, v)))
        .max_by(|x, y| x.0.cmp(&y.0).then(y.1.cmp(&x.1)))?;
    if v == u {
        return None;
    }
    let path = fg.shortest_path(p.cluster_of(u), p.cluster_of(v))?;
    Some((u, v, du, path))
}

/// One witness edge per hop: the lowest-id edge joining non-useless vertices.
pub fn supporting_edge_set(hpath: &[ClusterId], fg: &FriendGraph) -> Result<Vec<EdgeId>> {
    hpath
        .windows(2)
        .map(|w| {
            fg.witness(w[0], w[1])
                .ok_or_else(|| Error::Invariant(format!("H0 hop {} -> {} has no eligible edge", w[0], w[1])))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HarvestOptions {
    pub check_diameters: bool,
}

impl Default for HarvestOptions {
    fn default() -> Self {
        HarvestOptions { check_diameters: true }
    }
}

pub fn harvest_pairs(g: &CapacitatedGraph, p: &Partition, params: &ClusterParams, m: usize, opts: HarvestOptions) -> Result<PairBook> {
    params.validate()?;
    let mut book = PairBook {
        pairs: Vec::with_capacity(m),
        useless: vec![false; g.n()],
        abort: None,
        bad_sizes: Vec::new(),
        max_diameters: Vec::new(),
        group_counts: Vec::new(),
        useless_budget_exceeded_at: None,
    };
    let useless_budget = params.useless_budget * g.n() as f64;
    for it in 0..m {
        if book.useless_budget_exceeded_at.is_none() && book.useless_count() as f64 > useless_budget {
            warn!("iteration {it}: |V_U| = {} exceeds the useless budget {useless_budget:.1}", book.useless_count());
            book.useless_budget_exceeded_at = Some(it);
        }
        let (fg, outcome) = cluster(g, p, &book.useless, params);
        let state = match outcome {
            HierarchyOutcome::Complete(s) => s,
            HierarchyOutcome::Aborted { state, level } => {
                book.bad_sizes = state.bad_sizes.clone();
                book.abort = Some(HarvestAbort {
                    iteration: it,
                    level,
                    bad_sizes: state.bad_sizes,
                    reason: "bad vertices exceed budget".into(),
                });
                break;
            }
        };
        book.bad_sizes = state.bad_sizes.clone();
        book.group_counts = state.history.iter().map(Vec::len).collect();
        if opts.check_diameters {
            let diam = cluster_diameter_check(&state, &fg)?;
            if book.max_diameters.len() < diam.len() {
                book.max_diameters.resize(diam.len(), 0);
            }
            for (m, d) in book.max_diameters.iter_mut().zip(diam) {
                *m = (*m).max(d);
            }
        }
        let Some((a, b, dist_g, hpath)) = find_typical_pair(g, p, &fg, &state, &book.useless) else {
            book.abort = Some(HarvestAbort {
                iteration: it,
                level: 0,
                bad_sizes: state.bad_sizes.clone(),
                reason: "no surviving group holds two connected non-useless vertices".into(),
            });
            break;
        };
        let support = supporting_edge_set(&hpath, &fg)?;
        for &e in &support {
            let edge = g.edge(e);
            book.useless[edge.u] = true;
            book.useless[edge.v] = true;
        }
        book.useless[a] = true;
        book.useless[b] = true;
        book.pairs.push(TypicalPair {
            a,
            b,
            hpath,
            support,
            dist_g,
        });
    }
    Ok(book)
}

/// Per-family superedge load statistics of the H-routing.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FamilyStats {
    /// max over superedges of load / capacity, one entry per segment family.
    pub max_ratio: [Rational; 3],
    /// Superedges used by at least two families.
    pub overlaps: usize,
    /// Superedges used by all three families.
    pub triple_overlaps: usize,
}

#[derive(Debug, Clone)]
pub struct DemandAssembly {
    pub demand: Demand,
    /// Routing of `demand` in H, one unit path per non-self pair.
    pub flow: PathFlow,
    /// Every routed pair including self-pairs.
    pub routes: Vec<RouteRecord>,
    pub pair_records: Vec<PairRecord>,
    pub routing_a: TerminalRouting,
    pub routing_b: TerminalRouting,
    pub self_pairs: usize,
    /// Pairs left out because an endpoint could not be routed.
    pub dropped_pairs: usize,
    pub family: FamilyStats,
}

impl DemandAssembly {
    pub fn is_partial(&self) -> bool {
        !self.routing_a.is_complete() || !self.routing_b.is_complete()
    }

    /// Terminal paths of both endpoint families, for the paths file.
    pub fn g_paths(&self) -> Vec<GPath> {
        self.routing_a
            .paths
            .iter()
            .chain(&self.routing_b.paths)
            .flatten()
            .cloned()
            .collect()
    }
}

fn typical_hpath(pair: &TypicalPair, h: &ContractedGraph) -> Result<HPath> {
    let mut out = HPath::trivial(pair.hpath[0]);
    for w in pair.hpath.windows(2) {
        let sid = h
            .superedge_between(w[0], w[1])
            .ok_or_else(|| Error::Invariant(format!("H0 edge {}-{} missing from H", w[0], w[1])))?;
        out.nodes.push(w[1]);
        out.superedges.push(sid);
    }
    Ok(out)
}

/// Routes both endpoint families to terminals and concatenates, per pair,
/// the induced A-path (reversed), the typical path and the induced B-path.
pub fn assemble_demand(g: &CapacitatedGraph, h: &ContractedGraph, book: &PairBook) -> Result<DemandAssembly> {
    let a_side: Vec<VertexId> = book.pairs.iter().map(|p| p.a).collect();
    let b_side: Vec<VertexId> = book.pairs.iter().map(|p| p.b).collect();
    let routing_a = route_to_terminals(g, &a_side)?;
    let routing_b = route_to_terminals(g, &b_side)?;

    let edges = h.superedges().len();
    let mut load = vec![[0u64; 3]; edges];
    let mut demand = Demand::new();
    let mut flow = PathFlow::default();
    let mut routes = Vec::new();
    let mut pair_records = Vec::new();
    let (mut self_pairs, mut dropped) = (0, 0);
    for (i, pair) in book.pairs.iter().enumerate() {
        let (Some(pa), Some(pb)) = (&routing_a.paths[i], &routing_b.paths[i]) else {
            dropped += 1;
            continue;
        };
        let (t, t2) = (pa.end(), pb.end());
        let seg_a = induce_path(&pa.reversed().vertices, h)?;
        let seg_q = typical_hpath(pair, h)?;
        let seg_b = induce_path(&pb.vertices, h)?;
        for (fam, seg) in [&seg_a, &seg_q, &seg_b].into_iter().enumerate() {
            for &s in &seg.superedges {
                load[s][fam] += 1;
            }
        }
        let mut walk = seg_a;
        walk.extend(&seg_q);
        walk.extend(&seg_b);
        pair_records.push(PairRecord { a: pair.a, b: pair.b, t, t2 });
        routes.push(RouteRecord {
            pair: (t, t2),
            nodes: walk.nodes.clone(),
        });
        if t == t2 {
            self_pairs += 1;
            continue;
        }
        demand.add(t, t2, Rational::one())?;
        flow.paths.push(FlowPath {
            pair: (t, t2),
            nodes: walk.nodes,
            edges: walk.superedges,
            value: Rational::one(),
        });
    }

    let mut family = FamilyStats {
        max_ratio: [Rational::zero(), Rational::zero(), Rational::zero()],
        overlaps: 0,
        triple_overlaps: 0,
    };
    for (s, l) in load.iter().enumerate() {
        let cap = h.superedges()[s].cap;
        for (&units, best) in l.iter().zip(family.max_ratio.iter_mut()) {
            let r = Rational::new(units.into(), cap.into());
            if r > *best {
                *best = r;
            }
        }
        let used = l.iter().filter(|&&x| x > 0).count();
        family.overlaps += usize::from(used >= 2);
        family.triple_overlaps += usize::from(used == 3);
    }
    if dropped > 0 {
        warn!("{dropped} pairs dropped: endpoint routing infeasible");
    }
    Ok(DemandAssembly {
        demand,
        flow,
        routes,
        pair_records,
        routing_a,
        routing_b,
        self_pairs,
        dropped_pairs: dropped,
        family,
    })
}
