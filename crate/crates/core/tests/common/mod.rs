//! Oracles and generators shared by the integration tests and the
//! acceptance run. Each oracle is written from the definitions, not from the
//! library code it checks.
#![allow(dead_code)]

use std::collections::VecDeque;

use contragap::certificate::CertifyConfig;
use contragap::clustering::{cluster, cluster_diameter_check, ClusterParams, HierarchyOutcome};
use contragap::congestion::{congestion_lower_bound, lp_min_congestion, routing_congestion, Bound};
use contragap::graph::{contract, induce_path, FlowPath, PathFlow};
use contragap::{CapacitatedGraph, Demand, Partition, Rational};
use num_traits::ToPrimitive;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Directed arcs (u, v, cap); undirected edges appear as two arcs.
pub fn brute_min_cut(n: usize, arcs: &[(usize, usize, u64)], s: usize, t: usize) -> u64 {
    let mut best = u64::MAX;
    for mask in 0u32..(1 << n) {
        if mask >> s & 1 == 0 || mask >> t & 1 == 1 {
            continue;
        }
        let cut = arcs
            .iter()
            .filter(|&&(u, v, _)| mask >> u & 1 == 1 && mask >> v & 1 == 0)
            .map(|a| a.2)
            .sum();
        best = best.min(cut);
    }
    best
}

/// min over proper nonempty S of cut(S) / min(vol S, vol S̄), by plain subset enumeration.
pub fn conductance_oracle(g: &CapacitatedGraph) -> f64 {
    let n = g.n();
    let deg: Vec<usize> = (0..n).map(|v| g.degree(v)).collect();
    let mut best = f64::INFINITY;
    for mask in 1u32..(1 << n) - 1 {
        let inside = |v: usize| mask >> v & 1 == 1;
        let cut = g.edges().iter().filter(|e| inside(e.u) != inside(e.v)).count();
        let vol_s: usize = (0..n).filter(|&v| inside(v)).map(|v| deg[v]).sum();
        let vol_t: usize = deg.iter().sum::<usize>() - vol_s;
        let denom = vol_s.min(vol_t);
        let phi = if denom == 0 { 0.0 } else { cut as f64 / denom as f64 };
        best = best.min(phi);
    }
    best
}

pub struct Sim {
    pub family: Vec<Vec<usize>>,
    pub discarded: Vec<Vec<usize>>,
    pub bad_sizes: Vec<usize>,
    pub history: Vec<Vec<Vec<usize>>>,
    pub aborted_at: Option<usize>,
}

/// Step-by-step reference run, working from the raw edge list each level.
pub fn simulate(g: &CapacitatedGraph, labels: &[usize], f: usize, useless: &[bool], params: &ClusterParams) -> Sim {
    let size_of = |c: usize| labels.iter().filter(|&&l| l == c).count();
    let mut sim = Sim {
        family: (0..f).map(|c| vec![c]).collect(),
        discarded: vec![],
        bad_sizes: vec![],
        history: vec![],
        aborted_at: None,
    };
    for level in 0..params.levels {
        let fam = &sim.family;
        let count = fam.len();
        let group_of = |c: usize| fam.iter().position(|grp| grp.contains(&c));
        let friendly = |a: usize, b: usize| {
            a == b
                || g.edges().iter().any(|e| {
                    !useless[e.u] && !useless[e.v] && {
                        let (x, y) = (group_of(labels[e.u]), group_of(labels[e.v]));
                        (x, y) == (Some(a), Some(b)) || (x, y) == (Some(b), Some(a))
                    }
                })
        };
        let friends: Vec<Vec<usize>> = (0..count).map(|a| (0..count).filter(|&b| friendly(a, b)).collect()).collect();
        let gsize: Vec<usize> = fam.iter().map(|grp| grp.iter().map(|&c| size_of(c)).sum()).collect();
        let threshold = params.s.powf(params.growth.powi(level as i32 + 1));
        let good: Vec<bool> = friends.iter().map(|fs| fs.iter().map(|&h| gsize[h]).sum::<usize>() as f64 > threshold).collect();

        let mut marked = vec![false; count];
        let mut owner = vec![usize::MAX; count];
        let mut groups: Vec<Vec<usize>> = vec![];
        loop {
            let pick = (0..count).find(|&h| good[h] && !marked[h] && friends[h].iter().all(|&x| !marked[x]));
            let Some(h) = pick else { break };
            for &x in &friends[h] {
                marked[x] = true;
                owner[x] = groups.len();
            }
            groups.push(friends[h].iter().flat_map(|&x| fam[x].clone()).collect());
        }
        let first = marked.clone();
        for h in 0..count {
            if good[h] && !first[h] {
                let anchor = *friends[h].iter().filter(|&&x| first[x]).min().unwrap();
                groups[owner[anchor]].extend(fam[h].iter().copied());
                marked[h] = true;
            }
        }
        let mut bad: Vec<usize> = (0..count).filter(|&h| !marked[h]).flat_map(|h| fam[h].clone()).collect();
        bad.sort_unstable();
        groups.iter_mut().for_each(|grp| grp.sort_unstable());
        sim.bad_sizes.push(bad.iter().map(|&c| size_of(c)).sum());
        sim.discarded.push(bad);
        sim.history.push(groups.clone());
        sim.family = groups;
        if sim.bad_sizes.iter().sum::<usize>() as f64 > params.bad_budget * g.n() as f64 {
            sim.aborted_at = Some(level + 1);
            break;
        }
    }
    sim
}

pub fn params(s: f64, growth: f64, levels: usize, bad_budget: f64) -> ClusterParams {
    ClusterParams {
        s,
        growth,
        levels,
        useless_budget: 1.0,
        bad_budget,
        bad0_budget: 0.24,
        purity: 0.875,
        overrides: vec![],
    }
}

pub fn compare_clustering(g: &CapacitatedGraph, labels: &[usize], useless: &[bool], p: &ClusterParams, tag: &str) -> (bool, bool) {
    let part = Partition::from_labels(labels);
    let f = part.cluster_count();
    let canon: Vec<usize> = (0..g.n()).map(|v| part.cluster_of(v)).collect();
    let sim = simulate(g, &canon, f, useless, p);
    let (fg, out) = cluster(g, &part, useless, p);
    let st = out.state();
    assert_eq!(st.family, sim.family, "{tag}: family");
    assert_eq!(st.discarded, sim.discarded, "{tag}: discarded");
    assert_eq!(st.bad_sizes, sim.bad_sizes, "{tag}: bad sizes");
    assert_eq!(st.history, sim.history, "{tag}: history");
    match (&out, sim.aborted_at) {
        (HierarchyOutcome::Complete(_), None) => {}
        (HierarchyOutcome::Aborted { level, .. }, Some(l)) => assert_eq!(*level, l, "{tag}: abort level"),
        (o, s) => panic!("{tag}: outcome {} vs simulated abort {s:?}", o.is_complete()),
    }
    // one diameter per recorded level
    if let Ok(diams) = cluster_diameter_check(st, &fg) {
        assert_eq!(diams.len(), st.history.len());
    }
    (out.is_complete(), st.family.iter().any(|grp| grp.len() > 1))
}

/// Connected random graph with `k` terminals 0..k.
pub fn random_instance(rng: &mut ChaCha8Rng, n: usize, k: usize) -> CapacitatedGraph {
    let mut edges: Vec<(usize, usize, u64)> = (1..n).map(|v| (rng.gen_range(0..v), v, rng.gen_range(1..4))).collect();
    for _ in 0..rng.gen_range(0..n) {
        let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if u != v {
            edges.push((u, v, rng.gen_range(1..4)));
        }
    }
    CapacitatedGraph::new(n, &edges, (0..k).collect()).unwrap()
}

/// Terminal i gets cluster i; everything else lands in a random cluster.
pub fn random_partition(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Partition {
    let extra = rng.gen_range(1..=n - k);
    let labels: Vec<usize> = (0..n).map(|v| if v < k { v } else { rng.gen_range(0..k + extra) }).collect();
    Partition::from_labels(&labels)
}

pub fn random_demand(rng: &mut ChaCha8Rng, k: usize) -> Demand {
    let mut d = Demand::new();
    while d.is_empty() {
        for a in 0..k {
            for b in a + 1..k {
                if rng.gen_bool(0.4) {
                    d.add(a, b, Rational::new(rng.gen_range(1..6).into(), rng.gen_range(1..4).into())).unwrap();
                }
            }
        }
    }
    d
}

pub fn bfs_path(g: &CapacitatedGraph, s: usize, t: usize) -> Vec<usize> {
    let mut prev = vec![usize::MAX; g.n()];
    prev[s] = s;
    let mut q = VecDeque::from([s]);
    while let Some(x) = q.pop_front() {
        for e in g.edges() {
            let y = if e.u == x { e.v } else if e.v == x { e.u } else { continue };
            if prev[y] == usize::MAX {
                prev[y] = x;
                q.push_back(y);
            }
        }
    }
    let mut walk = vec![t];
    while *walk.last().unwrap() != s {
        walk.push(prev[*walk.last().unwrap()]);
    }
    walk.reverse();
    walk
}

pub fn lenient(m: usize) -> CertifyConfig {
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

pub fn ring(n: usize, terminals: Vec<usize>) -> CapacitatedGraph {
    let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n, 1)).collect();
    CapacitatedGraph::new(n, &edges, terminals).unwrap()
}

pub const TOL: f64 = 1e-6;

pub fn to_f64(x: &Rational) -> f64 {
    x.to_f64().unwrap()
}

/// One random LP sandwich check: returns (lower, LP(G), LP(H), routing in H).
pub fn lp_sandwich_trial(rng: &mut ChaCha8Rng, trial: usize) -> (f64, f64, f64, f64) {
    let n = rng.gen_range(10..=60);
    let k = rng.gen_range(2..=8);
    let g = random_instance(rng, n, k);
    let p = random_partition(rng, n, k);
    let d = random_demand(rng, k);
    let h = contract(&g, &p).unwrap();

    let Bound::Finite(lower) = congestion_lower_bound(&g, &d).unwrap() else { panic!("trial {trial}: disconnected") };
    let lp_g = lp_min_congestion(&g, &d).unwrap().value;
    let lp_h = lp_min_congestion(&h, &d).unwrap().value;

    // shortest paths in G, pushed into H
    let mut flow = PathFlow::default();
    for (&(a, b), v) in d.iter() {
        let hp = induce_path(&bfs_path(&g, a, b), &h).unwrap();
        flow.paths.push(FlowPath { pair: (a, b), nodes: hp.nodes, edges: hp.superedges, value: v.clone() });
    }
    let upper = routing_congestion(&h, &flow, &d).unwrap();
    (to_f64(&lower), lp_g, lp_h, to_f64(&upper))
}

/// (name, graph, cluster labels, useless mask, parameters)
pub type ClusteringCase = (String, CapacitatedGraph, Vec<usize>, Vec<bool>, ClusterParams);

/// Hand-built cases, each with its parameters.
pub fn crafted_clustering_cases() -> Vec<ClusteringCase> {
    let star: Vec<(usize, usize, u64)> = (1..9).map(|v| (0, v, 1)).collect();
    let star_g = CapacitatedGraph::new(9, &star, vec![]).unwrap();
    let mut centre_useless = vec![false; 9];
    centre_useless[0] = true;
    let path: Vec<(usize, usize, u64)> = (0..29).map(|v| (v, v + 1, 1)).collect();
    let path_g = CapacitatedGraph::new(30, &path, vec![]).unwrap();
    let pairs: Vec<usize> = (0..30).map(|v| v / 2).collect();
    let split = CapacitatedGraph::new(8, &[(0, 1, 1), (1, 2, 1), (2, 3, 1), (4, 5, 1), (5, 6, 1), (6, 7, 1)], vec![]).unwrap();
    vec![
        ("star".into(), star_g.clone(), (0..9).collect(), vec![false; 9], params(2.0, 2.0, 2, 0.96)),
        ("star, useless centre".into(), star_g, (0..9).collect(), centre_useless, params(2.0, 2.0, 1, 0.96)),
        ("path in pairs".into(), path_g.clone(), pairs.clone(), vec![false; 30], params(2.0, 1.5, 3, 0.96)),
        ("path in pairs, tight budget".into(), path_g, pairs, vec![false; 30], params(2.0, 1.5, 3, 0.1)),
        ("two components".into(), split, vec![0, 0, 1, 1, 2, 2, 3, 3], vec![false; 8], params(2.0, 1.2, 2, 0.96)),
    ]
}

/// A random clustering case with n ≤ 40.
pub fn random_clustering_case(rng: &mut ChaCha8Rng) -> (CapacitatedGraph, Vec<usize>, Vec<bool>, ClusterParams) {
    let n = rng.gen_range(4..=40);
    let mut edges = vec![];
    for _ in 0..rng.gen_range(n..3 * n) {
        let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if u != v {
            edges.push((u, v, 1));
        }
    }
    let g = CapacitatedGraph::new(n, &edges, vec![]).unwrap();
    let f = rng.gen_range(1..=n);
    let labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..f)).collect();
    let useless: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.1)).collect();
    let p = params(rng.gen_range(2.0..4.0), rng.gen_range(1.1..2.0), rng.gen_range(1..4), rng.gen_range(0.3..1.0));
    (g, labels, useless, p)
}
