//! Congestion bounds: the distance-dual lower bound in `G`, the congestion of
//! an explicit path routing, and a linear-programming min-congestion oracle.

use std::collections::BTreeMap;
use std::fmt;

use microlp::{ComparisonOp, LinearExpr, OptimizationDirection, Problem};
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::graph::{bfs_from, CapacitatedGraph, Demand, FlowNetwork, PathFlow, VertexId};
use crate::{rat, Rational};

/// A congestion lower bound; infinite when a demand pair is disconnected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Bound {
    Finite(Rational),
    Infinite,
}

impl Bound {
    pub fn finite(&self) -> Option<&Rational> {
        match self {
            Bound::Finite(r) => Some(r),
            Bound::Infinite => None,
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::Finite(r) => write!(f, "{}", crate::ratio_string(r)),
            Bound::Infinite => f.write_str("inf"),
        }
    }
}

fn check_inputs(g: &CapacitatedGraph, d: &Demand) -> Result<Rational> {
    let total = g.total_capacity();
    if total == 0 {
        return Err(Error::InvalidInput("total capacity is zero".into()));
    }
    if d.is_empty() {
        return Err(Error::InvalidInput("demand has no positive entry".into()));
    }
    for &(t, u) in d.iter().map(|(k, _)| k) {
        for x in [t, u] {
            if x >= g.n() {
                return Err(Error::VertexOutOfRange { vertex: x, n: g.n() });
            }
        }
    }
    Ok(rat(total))
}

/// Σ 𝒟(t,t′)·dist_G(t,t′) / c(E): every routing of 𝒟 spends at least that
/// much capacity-weighted length.
pub fn congestion_lower_bound(g: &CapacitatedGraph, d: &Demand) -> Result<Bound> {
    let total = check_inputs(g, d)?;
    let mut by_source: BTreeMap<VertexId, Vec<(VertexId, &Rational)>> = BTreeMap::new();
    for (&(t, u), v) in d.iter() {
        by_source.entry(t).or_default().push((u, v));
    }
    let mut acc = Rational::zero();
    for (s, targets) in by_source {
        let dist = bfs_from(g, &[s]);
        for (u, v) in targets {
            match dist[u] {
                Some(k) => acc += v * rat(k as u128),
                None => return Ok(Bound::Infinite),
            }
        }
    }
    Ok(Bound::Finite(acc / total))
}

/// Total flow-length over total capacity, minimized by shortest-path routing.
/// Evaluated pair by pair from each endpoint's own BFS.
pub fn average_congestion_lower_bound(g: &CapacitatedGraph, d: &Demand) -> Result<Bound> {
    let total = check_inputs(g, d)?;
    let mut flow_length = Rational::zero();
    for (&(t, u), v) in d.iter() {
        let from_u = bfs_from(g, &[u]);
        let Some(len) = from_u[t] else {
            return Ok(Bound::Infinite);
        };
        flow_length += v * rat(len as u128);
    }
    Ok(Bound::Finite(flow_length / total))
}

/// Average congestion Σ f_P·|P| / c(E) of an explicit routing.
pub fn average_congestion<N: FlowNetwork + ?Sized>(net: &N, flow: &PathFlow) -> Result<Rational> {
    let total: Rational = (0..net.edge_count()).map(|e| net.capacity(e)).sum();
    if total.is_zero() {
        return Err(Error::InvalidInput("total capacity is zero".into()));
    }
    let loads = flow.edge_loads(net)?;
    Ok(loads.into_iter().sum::<Rational>() / total)
}

/// Max over edges of load / capacity, after checking that `flow` routes
/// exactly `d`.
pub fn routing_congestion<N: FlowNetwork + ?Sized>(net: &N, flow: &PathFlow, d: &Demand) -> Result<Rational> {
    let routed = flow.routed();
    for (&(t, u), v) in d.iter() {
        let got = routed.get(&(t, u)).cloned().unwrap_or_else(Rational::zero);
        if &got != v {
            return Err(Error::InvalidInput(format!(
                "pair ({t}, {u}) routes {got} but demands {v}"
            )));
        }
    }
    if let Some((&(t, u), _)) = routed.iter().find(|(&(t, u), _)| d.get(t, u).is_zero()) {
        return Err(Error::InvalidInput(format!("flow routes undemanded pair ({t}, {u})")));
    }
    let loads = flow.edge_loads(net)?;
    let mut worst = Rational::zero();
    for (e, load) in loads.into_iter().enumerate() {
        if load.is_zero() {
            continue;
        }
        let cap = net.capacity(e);
        if cap.is_zero() {
            return Err(Error::InvalidInput(format!("edge {e} has flow but zero capacity")));
        }
        let r = load / cap;
        if r > worst {
            worst = r;
        }
    }
    Ok(worst)
}

pub const LP_NODE_LIMIT: usize = 200;
pub const LP_TERMINAL_LIMIT: usize = 12;
/// Feasibility tolerance used when re-checking the solver's flow.
pub const LP_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub value: f64,
    /// (source terminal, net flow per edge in endpoint order) per aggregated commodity.
    pub flows: Vec<(VertexId, Vec<f64>)>,
    pub loads: Vec<f64>,
}

/// Minimum congestion of `d` in `net` by the edge formulation, with all pairs
/// sharing their lower terminal merged into one single-source commodity.
pub fn lp_min_congestion<N: FlowNetwork + ?Sized>(net: &N, d: &Demand) -> Result<LpSolution> {
    let nodes = net.node_count();
    if nodes > LP_NODE_LIMIT {
        return Err(Error::TooLarge {
            what: "nodes for the congestion LP",
            got: nodes,
            limit: LP_NODE_LIMIT,
        });
    }
    let support = d.support();
    if support.len() > LP_TERMINAL_LIMIT {
        return Err(Error::TooLarge {
            what: "terminals for the congestion LP",
            got: support.len(),
            limit: LP_TERMINAL_LIMIT,
        });
    }
    if d.is_empty() {
        return Err(Error::InvalidInput("demand has no positive entry".into()));
    }
    let node_of = |t: VertexId| {
        net.terminal_node(t)
            .ok_or_else(|| Error::InvalidInput(format!("{t} is not a terminal of the network")))
    };
    let mut commodities: BTreeMap<VertexId, Vec<f64>> = BTreeMap::new();
    for (&(t, u), v) in d.iter() {
        let (s, x) = (node_of(t)?, node_of(u)?);
        let v = v.to_f64().unwrap_or(f64::INFINITY);
        let supply = commodities.entry(t).or_insert_with(|| vec![0.0; nodes]);
        supply[s] += v;
        supply[x] -= v;
    }

    let edges = net.edge_count();
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let lambda = lp.add_var(1.0, (0.0, f64::INFINITY));
    let mut vars = Vec::with_capacity(commodities.len());
    for _ in 0..commodities.len() {
        let fwd: Vec<_> = (0..edges).map(|_| lp.add_var(0.0, (0.0, f64::INFINITY))).collect();
        let back: Vec<_> = (0..edges).map(|_| lp.add_var(0.0, (0.0, f64::INFINITY))).collect();
        vars.push((fwd, back));
    }
    let mut incident: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nodes];
    for e in 0..edges {
        let (a, b) = net.endpoints(e);
        incident[a].push((e, 1.0));
        incident[b].push((e, -1.0));
    }
    for ((&t, supply), (fwd, back)) in commodities.iter().zip(&vars) {
        let source = node_of(t)?;
        for x in 0..nodes {
            if x == source {
                continue; // implied by the others
            }
            if incident[x].is_empty() {
                if supply[x] != 0.0 {
                    return Err(Error::Lp(format!("terminal node {x} is isolated")));
                }
                continue;
            }
            let mut expr = LinearExpr::empty();
            for &(e, sign) in &incident[x] {
                expr.add(fwd[e], sign);
                expr.add(back[e], -sign);
            }
            lp.add_constraint(expr, ComparisonOp::Eq, supply[x]);
        }
    }
    for e in 0..edges {
        let mut expr = LinearExpr::empty();
        for (fwd, back) in &vars {
            expr.add(fwd[e], 1.0);
            expr.add(back[e], 1.0);
        }
        expr.add(lambda, -net.capacity_f64(e));
        lp.add_constraint(expr, ComparisonOp::Le, 0.0);
    }
    let sol = lp.solve().map_err(|e| Error::Lp(e.to_string()))?;

    let mut loads = vec![0.0; edges];
    let mut flows = Vec::with_capacity(vars.len());
    for (&t, (fwd, back)) in commodities.keys().zip(&vars) {
        let net_flow: Vec<f64> = (0..edges).map(|e| sol.var_value(fwd[e]) - sol.var_value(back[e])).collect();
        for e in 0..edges {
            loads[e] += net_flow[e].abs();
        }
        flows.push((t, net_flow));
    }
    let value = *sol.var_value(lambda);
    verify_lp_flow(net, &commodities, &flows, &loads, value)?;
    Ok(LpSolution { value, flows, loads })
}

fn verify_lp_flow<N: FlowNetwork + ?Sized>(
    net: &N,
    commodities: &BTreeMap<VertexId, Vec<f64>>,
    flows: &[(VertexId, Vec<f64>)],
    loads: &[f64],
    value: f64,
) -> Result<()> {
    let scale = commodities
        .values()
        .flat_map(|s| s.iter())
        .fold(1.0f64, |m, x| m.max(x.abs()));
    let tol = LP_TOLERANCE * scale * (1.0 + net.edge_count() as f64);
    for ((_, supply), (_, flow)) in commodities.iter().zip(flows) {
        let mut excess = vec![0.0; net.node_count()];
        for (e, f) in flow.iter().enumerate() {
            let (a, b) = net.endpoints(e);
            excess[a] += f;
            excess[b] -= f;
        }
        for (x, (got, want)) in excess.iter().zip(supply).enumerate() {
            if (got - want).abs() > tol {
                return Err(Error::Lp(format!("flow conservation off by {} at node {x}", got - want)));
            }
        }
    }
    for (e, l) in loads.iter().enumerate() {
        if *l > value * net.capacity_f64(e) + tol {
            return Err(Error::Lp(format!("edge {e} load {l} exceeds congestion {value}")));
        }
    }
    Ok(())
}
