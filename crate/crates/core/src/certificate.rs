//! Quality-gap certificates for a single contraction and for convex
//! combinations of contractions glued at the terminals.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::clustering::ClusterParams;
use crate::congestion::{congestion_lower_bound, lp_min_congestion, routing_congestion, Bound, LP_NODE_LIMIT, LP_TERMINAL_LIMIT};
use crate::demand::{assemble_demand, harvest_pairs, DemandAssembly, HarvestOptions, PairBook};
use crate::error::{Error, Result};
use crate::graph::{contract, validate_partition, CapacitatedGraph, ContractedGraph, Demand, FlowNetwork, FlowPath, PathFlow, Partition, VertexId};
use crate::io::{graph_to_text, partition_to_text};
use crate::{rat, ratio_string, Rational};

/// Notes attached to every certificate.
pub const STANDING_DEVIATIONS: &[&str] = &[
    "tree edges get capacity max{c'(e), 1}",
    "parallel superedges are merged into one capacity-summed superedge",
    "terminal pairs with t = t' are left out of the demand",
    "LP values come from a floating-point simplex, verified to 1e-9",
];

#[derive(Debug, Clone, PartialEq)]
pub struct CertifyConfig {
    pub cluster: ClusterParams,
    pub m: usize,
    pub lp_oracle: bool,
    pub check_diameters: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceDigest {
    pub graph_sha256: String,
    pub n: usize,
    pub edges: usize,
    pub terminals: usize,
    pub total_capacity: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentReport {
    pub partition_sha256: String,
    pub probability: String,
    pub clusters: usize,
    pub superedges: usize,
    pub m_achieved: usize,
    pub pair_distance_sum: u64,
    pub bad_node_vector: Vec<usize>,
    pub group_counts: Vec<usize>,
    pub max_diameters: Vec<usize>,
    pub useless: usize,
    pub useless_budget_exceeded_at: Option<usize>,
    pub abort: Option<String>,
    pub abort_iteration: Option<usize>,
    pub self_pairs: usize,
    pub dropped_pairs: usize,
    pub routing_partial: bool,
    pub cut_witness_capacity: Vec<u64>,
    /// max load / capacity, one entry per segment family.
    pub family_max_load: [String; 3],
    pub family_overlaps: usize,
    pub family_triple_overlaps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapCertificate {
    pub instance: InstanceDigest,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, String>,
    pub components: Vec<ComponentReport>,
    pub m_target: usize,
    pub m_achieved: usize,
    pub demand_pairs: usize,
    pub demand_total: String,
    /// Σ 𝒟·dist_G, the numerator of the lower bound.
    pub demand_distance: String,
    /// Σ over components of probability · Σ dist_G(a_i, b_i).
    pub pair_distance_sum: String,
    pub lower_g: String,
    pub upper_h: String,
    pub ratio: Option<String>,
    pub lp_g: Option<f64>,
    pub lp_h: Option<f64>,
    pub aborted: bool,
    pub partial: bool,
    pub deviations: Vec<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub files: BTreeMap<String, String>,
}

impl GapCertificate {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Run finished without abort and every pair was routed.
    pub fn is_full(&self) -> bool {
        !self.aborted && !self.partial
    }
}

pub fn sha256_hex(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

pub fn digest(g: &CapacitatedGraph) -> InstanceDigest {
    InstanceDigest {
        graph_sha256: sha256_hex(&graph_to_text(g)),
        n: g.n(),
        edges: g.edge_count(),
        terminals: g.terminals().len(),
        total_capacity: g.total_capacity().to_string(),
    }
}

// LP values are certified to 1e-9; rounding keeps equal optima byte-identical
// across formulations that differ only in variable order.
fn round_lp(x: f64) -> f64 {
    (x * 1e9).round() / 1e9
}

fn bound_string(b: &Bound) -> String {
    b.to_string()
}

/// Everything one partition contributes.
#[derive(Debug, Clone)]
pub struct Component {
    pub partition: Partition,
    pub probability: Rational,
    pub h: ContractedGraph,
    pub book: PairBook,
    pub assembly: DemandAssembly,
}

fn run_component(g: &CapacitatedGraph, p: &Partition, probability: Rational, cfg: &CertifyConfig) -> Result<Component> {
    if p.vertex_count() != g.n() {
        return Err(Error::PartitionSize {
            expected: g.n(),
            got: p.vertex_count(),
        });
    }
    if let Err((t, u)) = validate_partition(g, p) {
        return Err(Error::InvalidPartition(t, u));
    }
    let h = contract(g, p)?;
    let book = harvest_pairs(
        g,
        p,
        &cfg.cluster,
        cfg.m,
        HarvestOptions {
            check_diameters: cfg.check_diameters,
        },
    )?;
    let assembly = assemble_demand(g, &h, &book)?;
    Ok(Component {
        partition: p.clone(),
        probability,
        h,
        book,
        assembly,
    })
}

fn component_report(c: &Component) -> ComponentReport {
    let a = &c.assembly;
    ComponentReport {
        partition_sha256: sha256_hex(&partition_to_text(&c.partition)),
        probability: ratio_string(&c.probability),
        clusters: c.h.node_count(),
        superedges: c.h.superedges().len(),
        m_achieved: c.book.pairs.len(),
        pair_distance_sum: c.book.total_distance(),
        bad_node_vector: c.book.bad_sizes.clone(),
        group_counts: c.book.group_counts.clone(),
        max_diameters: c.book.max_diameters.clone(),
        useless: c.book.useless_count(),
        useless_budget_exceeded_at: c.book.useless_budget_exceeded_at,
        abort: c.book.abort.as_ref().map(|x| x.reason.clone()),
        abort_iteration: c.book.abort.as_ref().map(|x| x.iteration),
        self_pairs: a.self_pairs,
        dropped_pairs: a.dropped_pairs,
        routing_partial: a.is_partial(),
        cut_witness_capacity: [&a.routing_a, &a.routing_b]
            .iter()
            .filter_map(|r| r.witness.as_ref().map(|w| w.capacity))
            .collect(),
        family_max_load: a.family.max_ratio.clone().map(|r| ratio_string(&r)),
        family_overlaps: a.family.overlaps,
        family_triple_overlaps: a.family.triple_overlaps,
    }
}

fn lp_fits<N: FlowNetwork + ?Sized>(net: &N, d: &Demand) -> bool {
    net.node_count() <= LP_NODE_LIMIT && d.support().len() <= LP_TERMINAL_LIMIT && !d.is_empty()
}

struct Summary<'a> {
    demand: &'a Demand,
    upper_h: Rational,
    lp_h: Option<f64>,
}

fn finish(g: &CapacitatedGraph, cfg: &CertifyConfig, comps: &[Component], s: Summary<'_>) -> Result<GapCertificate> {
    let d = s.demand;
    let (lower, numer) = if d.is_empty() {
        (Bound::Finite(Rational::zero()), Bound::Finite(Rational::zero()))
    } else {
        let lower = congestion_lower_bound(g, d)?;
        let numer = match &lower {
            Bound::Finite(r) => Bound::Finite(r * rat(g.total_capacity())),
            Bound::Infinite => Bound::Infinite,
        };
        (lower, numer)
    };
    let ratio = match (&lower, s.upper_h.is_zero()) {
        (Bound::Finite(l), false) => Some(ratio_string(&(l / &s.upper_h))),
        _ => None,
    };
    let lp_g = if cfg.lp_oracle && lp_fits(g, d) {
        Some(round_lp(lp_min_congestion(g, d)?.value))
    } else {
        None
    };
    let mut deviations: Vec<String> = STANDING_DEVIATIONS.iter().map(|x| x.to_string()).collect();
    for o in &cfg.cluster.overrides {
        deviations.push(format!("cluster parameter `{o}` overridden"));
    }
    let pair_distance_sum: Rational = comps
        .iter()
        .map(|c| &c.probability * rat(c.book.total_distance() as u128))
        .sum();
    Ok(GapCertificate {
        instance: digest(g),
        params: BTreeMap::new(),
        components: comps.iter().map(component_report).collect(),
        m_target: cfg.m,
        m_achieved: comps.iter().map(|c| c.book.pairs.len()).sum(),
        demand_pairs: d.len(),
        demand_total: ratio_string(&d.total()),
        demand_distance: bound_string(&numer),
        pair_distance_sum: ratio_string(&pair_distance_sum),
        lower_g: bound_string(&lower),
        upper_h: ratio_string(&s.upper_h),
        ratio,
        lp_g,
        lp_h: s.lp_h,
        aborted: comps.iter().any(|c| c.book.abort.is_some()),
        partial: comps.iter().any(|c| c.assembly.is_partial()),
        deviations,
        files: BTreeMap::new(),
    })
}

/// Result of certifying one partition, with the intermediate artifacts.
#[derive(Debug, Clone)]
pub struct Certification {
    pub certificate: GapCertificate,
    pub component: Component,
}

pub fn certify_gap_detailed(g: &CapacitatedGraph, p: &Partition, cfg: &CertifyConfig) -> Result<Certification> {
    let comp = run_component(g, p, Rational::one(), cfg)?;
    let d = &comp.assembly.demand;
    let upper_h = routing_congestion(&comp.h, &comp.assembly.flow, d)?;
    let lp_h = if cfg.lp_oracle && lp_fits(&comp.h, d) {
        Some(round_lp(lp_min_congestion(&comp.h, d)?.value))
    } else {
        None
    };
    let certificate = finish(
        g,
        cfg,
        std::slice::from_ref(&comp),
        Summary {
            demand: d,
            upper_h,
            lp_h,
        },
    )?;
    Ok(Certification {
        certificate,
        component: comp,
    })
}

pub fn certify_gap(g: &CapacitatedGraph, p: &Partition, cfg: &CertifyConfig) -> Result<GapCertificate> {
    Ok(certify_gap_detailed(g, p, cfg)?.certificate)
}

/// A distribution over partitions.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexCombination {
    pub parts: Vec<(Partition, Rational)>,
}

impl ConvexCombination {
    pub fn point_mass(p: Partition) -> Self {
        ConvexCombination {
            parts: vec![(p, Rational::one())],
        }
    }

    pub fn validate(&self, g: &CapacitatedGraph) -> Result<()> {
        if self.parts.is_empty() {
            return Err(Error::InvalidInput("empty distribution".into()));
        }
        let mut total = Rational::zero();
        for (p, w) in &self.parts {
            if *w <= Rational::zero() {
                return Err(Error::InvalidInput(format!("non-positive probability {w}")));
            }
            if let Err((t, u)) = validate_partition(g, p) {
                return Err(Error::InvalidPartition(t, u));
            }
            total += w;
        }
        if !total.is_one() {
            return Err(Error::InvalidInput(format!("probabilities sum to {total}, not 1")));
        }
        Ok(())
    }
}

/// Disjoint copies of the contracted graphs, capacities scaled by their
/// probability, identified at the terminal supernodes. Node `i < k` is the
/// supernode of the i-th terminal; other supernodes follow copy by copy.
#[derive(Debug, Clone, PartialEq)]
pub struct GluedGraph {
    nodes: usize,
    terminals: Vec<VertexId>,
    edges: Vec<(usize, usize, Rational)>,
    /// Per copy: supernode id → glued node id.
    node_map: Vec<Vec<usize>>,
    /// Per copy: first glued edge id.
    edge_offset: Vec<usize>,
}

impl GluedGraph {
    pub fn build(copies: &[(&ContractedGraph, &Rational)]) -> Result<Self> {
        let terminals = copies
            .first()
            .map(|(h, _)| h.terminals().to_vec())
            .ok_or_else(|| Error::InvalidInput("no copies to glue".into()))?;
        let k = terminals.len();
        let mut nodes = k;
        let mut edges = Vec::new();
        let mut node_map = Vec::with_capacity(copies.len());
        let mut edge_offset = Vec::with_capacity(copies.len());
        for (h, w) in copies {
            if h.terminals() != terminals.as_slice() {
                return Err(Error::InvalidInput("copies disagree on the terminal set".into()));
            }
            let mut map = vec![usize::MAX; h.node_count()];
            for (i, &c) in h.terminal_nodes().iter().enumerate() {
                map[c] = i;
            }
            for slot in map.iter_mut().filter(|x| **x == usize::MAX) {
                *slot = nodes;
                nodes += 1;
            }
            edge_offset.push(edges.len());
            for s in h.superedges() {
                edges.push((map[s.a], map[s.b], rat(s.cap as u128) * *w));
            }
            node_map.push(map);
        }
        Ok(GluedGraph {
            nodes,
            terminals,
            edges,
            node_map,
            edge_offset,
        })
    }

    /// Maps a path of copy `j` into the glued graph.
    pub fn lift(&self, j: usize, path: &FlowPath, value: Rational) -> FlowPath {
        FlowPath {
            pair: path.pair,
            nodes: path.nodes.iter().map(|&c| self.node_map[j][c]).collect(),
            edges: path.edges.iter().map(|&e| self.edge_offset[j] + e).collect(),
            value,
        }
    }
}

impl FlowNetwork for GluedGraph {
    fn node_count(&self) -> usize {
        self.nodes
    }
    fn edge_count(&self) -> usize {
        self.edges.len()
    }
    fn endpoints(&self, e: usize) -> (usize, usize) {
        (self.edges[e].0, self.edges[e].1)
    }
    fn capacity(&self, e: usize) -> Rational {
        self.edges[e].2.clone()
    }
    fn terminal_node(&self, t: VertexId) -> Option<usize> {
        self.terminals.iter().position(|&x| x == t)
    }
}

#[derive(Debug, Clone)]
pub struct ConvexOutcome {
    pub glued: GluedGraph,
    pub demand: Demand,
    pub flow: PathFlow,
    pub certificate: GapCertificate,
    pub components: Vec<Component>,
}

/// Certifies a distribution: 𝒟_μ = Σ Pr·𝒟_H, routed copy by copy in H_μ
/// with every path scaled by its copy's probability.
pub fn convex_combine(g: &CapacitatedGraph, mu: &ConvexCombination, cfg: &CertifyConfig) -> Result<ConvexOutcome> {
    mu.validate(g)?;
    let comps: Vec<Component> = mu
        .parts
        .iter()
        .map(|(p, w)| run_component(g, p, w.clone(), cfg))
        .collect::<Result<_>>()?;
    let glued = GluedGraph::build(&comps.iter().map(|c| (&c.h, &c.probability)).collect::<Vec<_>>())?;
    let mut demand = Demand::new();
    let mut flow = PathFlow::default();
    for (j, c) in comps.iter().enumerate() {
        demand.merge(&c.assembly.demand.scaled(&c.probability));
        for path in &c.assembly.flow.paths {
            flow.paths.push(glued.lift(j, path, &path.value * &c.probability));
        }
    }
    let upper_h = routing_congestion(&glued, &flow, &demand)?;
    let lp_h = if cfg.lp_oracle && lp_fits(&glued, &demand) {
        Some(round_lp(lp_min_congestion(&glued, &demand)?.value))
    } else {
        None
    };
    let certificate = finish(
        g,
        cfg,
        &comps,
        Summary {
            demand: &demand,
            upper_h,
            lp_h,
        },
    )?;
    Ok(ConvexOutcome {
        glued,
        demand,
        flow,
        certificate,
        components: comps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(m: usize) -> CertifyConfig {
        CertifyConfig {
            cluster: ClusterParams {
                s: 2.0,
                growth: 1.01,
                levels: 1,
                useless_budget: 1.0,
                bad_budget: 0.96,
                bad0_budget: 0.24,
                purity: 0.875,
                overrides: vec![],
            },
            m,
            lp_oracle: true,
            check_diameters: true,
        }
    }

    fn ring(n: usize, terminals: Vec<usize>) -> CapacitatedGraph {
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n, 1)).collect();
        CapacitatedGraph::new(n, &edges, terminals).unwrap()
    }

    #[test]
    fn invalid_partition_is_reported() {
        let g = ring(6, vec![0, 3]);
        let err = certify_gap(&g, &Partition::whole(6), &cfg(1)).unwrap_err();
        assert!(matches!(err, Error::InvalidPartition(0, 3)));
    }

    #[test]
    fn point_mass_matches() {
        let g = ring(12, vec![0, 4, 8]);
        let p = Partition::new(vec![0, 0, 1, 1, 2, 2, 3, 3, 4, 4, 5, 5]).unwrap();
        let single = certify_gap(&g, &p, &cfg(2)).unwrap();
        let mixed = convex_combine(&g, &ConvexCombination::point_mass(p), &cfg(2)).unwrap();
        assert_eq!(single, mixed.certificate);
        assert_eq!(single.to_json().unwrap(), mixed.certificate.to_json().unwrap());
    }

    #[test]
    fn probabilities_must_sum_to_one() {
        let g = ring(6, vec![0, 3]);
        let half = Rational::new(1.into(), 2.into());
        let mu = ConvexCombination {
            parts: vec![(Partition::singleton(6), half)],
        };
        assert!(convex_combine(&g, &mu, &cfg(1)).is_err());
    }

    #[test]
    fn halves_scale_capacities() {
        let g = ring(8, vec![0, 4]);
        let half = Rational::new(1.into(), 2.into());
        let p1 = Partition::singleton(8);
        let p2 = Partition::new(vec![0, 0, 1, 1, 2, 2, 3, 3]).unwrap();
        let h1 = contract(&g, &p1).unwrap();
        let h2 = contract(&g, &p2).unwrap();
        let glued = GluedGraph::build(&[(&h1, &half), (&h2, &half)]).unwrap();
        assert_eq!(glued.node_count(), 2 + 6 + 2);
        assert_eq!(glued.edge_count(), 8 + 4);
        assert_eq!(glued.capacity(0), half);
        // second copy: four crossing ring edges of capacity 1, halved
        assert_eq!(glued.capacity(8), half);
        assert_eq!(glued.endpoints(8), (glued.terminal_node(0).unwrap(), 8));
    }
}
