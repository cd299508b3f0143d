//! Random regular multigraphs from unions of perfect matchings, and checks of
//! their expansion.

use std::collections::VecDeque;

use num_rational::Ratio;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{CapacitatedGraph, VertexId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExpanderSpec {
    pub n: usize,
    pub d: usize,
    pub seed: u64,
}

impl ExpanderSpec {
    pub fn new(n: usize, d: usize, seed: u64) -> Self {
        ExpanderSpec { n, d, seed }
    }
}

/// Union of `d` independent uniform perfect matchings on `0..n`, unit
/// capacities, no terminals. Repeated pairs become parallel edges so every
/// vertex has degree exactly `d`.
pub fn gen_matching_union(spec: ExpanderSpec) -> Result<CapacitatedGraph> {
    let ExpanderSpec { n, d, seed } = spec;
    if n < 2 || n % 2 != 0 {
        return Err(Error::InvalidInput(format!("matching union needs an even n >= 2, got {n}")));
    }
    if d == 0 {
        return Err(Error::InvalidInput("need at least one matching".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut perm: Vec<VertexId> = (0..n).collect();
    let mut edges = Vec::with_capacity(n / 2 * d);
    for _ in 0..d {
        perm.iter_mut().enumerate().for_each(|(i, v)| *v = i);
        // Fisher-Yates, high index down
        for i in (1..n).rev() {
            let j = rng.gen_range(0..=i);
            perm.swap(i, j);
        }
        for pair in perm.chunks_exact(2) {
            edges.push((pair[0], pair[1], 1));
        }
    }
    CapacitatedGraph::new(n, &edges, Vec::new())
}

pub const CONDUCTANCE_LIMIT: usize = 20;

/// Exact Φ(G) by enumerating every cut once (subsets avoiding vertex n-1).
/// Volumes count edge multiplicity; capacities are ignored. A side of zero
/// volume makes the graph disconnected, reported as 0.
pub fn conductance_brute(g: &CapacitatedGraph) -> Result<Ratio<u64>> {
    let n = g.n();
    if !(2..=CONDUCTANCE_LIMIT).contains(&n) {
        return Err(Error::TooLarge {
            what: "vertex count for conductance enumeration",
            got: n,
            limit: CONDUCTANCE_LIMIT,
        });
    }
    let deg: Vec<u64> = (0..n).map(|v| g.degree(v) as u64).collect();
    let total: u64 = deg.iter().sum();
    let mut in_s = vec![false; n];
    let (mut cut, mut vol) = (0u64, 0u64);
    let mut best: Option<(u64, u64)> = None;
    // Gray code over vertices 0..n-2: step i flips the lowest set bit of i.
    for step in 1u64..(1 << (n - 1)) {
        let v = step.trailing_zeros() as usize;
        let entering = !in_s[v];
        in_s[v] = entering;
        for &(w, _) in g.neighbors(v) {
            // edge toward the same side leaves the cut, toward the other side enters it
            if in_s[w] == entering {
                cut -= 1;
            } else {
                cut += 1;
            }
        }
        if entering {
            vol += deg[v];
        } else {
            vol -= deg[v];
        }
        let denom = vol.min(total - vol);
        let cand = if denom == 0 { (0, 1) } else { (cut, denom) };
        if best.is_none_or(|(a, b)| (cand.0 as u128) * (b as u128) < (a as u128) * (cand.1 as u128)) {
            best = Some(cand);
        }
    }
    let (a, b) = best.expect("n >= 2 gives at least one cut");
    Ok(Ratio::new(a, b))
}

/// Cheeger lower bound λ₂/2 on Φ(G), with λ₂ the second-smallest eigenvalue
/// of the normalized Laplacian.
///
/// Power iteration runs on `(I + D^-1/2 A D^-1/2) / 2` with the top eigenvector
/// projected out. The Rayleigh quotient under-estimates the eigenvalue sought,
/// so the final residual norm is added back before converting, which keeps
/// the returned value on the safe side of the true λ₂/2.
pub fn spectral_lower_bound(g: &CapacitatedGraph) -> Result<f64> {
    let n = g.n();
    if n < 2 || !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let inv_sqrt: Vec<f64> = (0..n).map(|v| 1.0 / (g.degree(v) as f64).sqrt()).collect();
    let top: Vec<f64> = {
        let t: Vec<f64> = (0..n).map(|v| (g.degree(v) as f64).sqrt()).collect();
        let norm = t.iter().map(|x| x * x).sum::<f64>().sqrt();
        t.into_iter().map(|x| x / norm).collect()
    };
    let apply = |x: &[f64], out: &mut [f64]| {
        for v in 0..n {
            let mut acc = 0.0;
            for &(w, _) in g.neighbors(v) {
                acc += x[w] * inv_sqrt[w];
            }
            out[v] = 0.5 * (x[v] + inv_sqrt[v] * acc);
        }
    };
    let deflate = |x: &mut [f64]| {
        let dot: f64 = x.iter().zip(&top).map(|(a, b)| a * b).sum();
        x.iter_mut().zip(&top).for_each(|(a, b)| *a -= dot * b);
    };
    let normalize = |x: &mut [f64]| {
        let norm = x.iter().map(|a| a * a).sum::<f64>().sqrt();
        x.iter_mut().for_each(|a| *a /= norm);
    };

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_c0de);
    let mut x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    deflate(&mut x);
    normalize(&mut x);
    let mut y = vec![0.0; n];
    let mut rho = 0.0;
    let mut residual = f64::INFINITY;
    let max_iter = 200_000usize.max(50 * n);
    for _ in 0..max_iter {
        apply(&x, &mut y);
        deflate(&mut y);
        rho = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        residual = x.iter().zip(&y).map(|(a, b)| (b - rho * a).powi(2)).sum::<f64>().sqrt();
        if residual < 1e-10 {
            break;
        }
        x.copy_from_slice(&y);
        if x.iter().all(|a| *a == 0.0) {
            // deflated space is annihilated: second eigenvalue of M is 0
            rho = 0.0;
            residual = 0.0;
            break;
        }
        normalize(&mut x);
    }
    // eigenvalue of M is (1 + mu)/2, lambda_2 = 1 - mu = 2 (1 - m2)
    let m2_upper = (rho + residual).min(1.0);
    let lambda2 = (2.0 * (1.0 - m2_upper)).max(0.0);
    Ok(lambda2 / 2.0)
}

/// `|N(U)| / |U|` where `N(U)` is the set of vertices outside `U` adjacent to it.
pub fn neighborhood_ratio(g: &CapacitatedGraph, set: &[VertexId]) -> Result<Ratio<u64>> {
    if set.is_empty() {
        return Err(Error::InvalidInput("empty vertex set".into()));
    }
    let mut in_u = vec![false; g.n()];
    for &v in set {
        if v >= g.n() {
            return Err(Error::VertexOutOfRange { vertex: v, n: g.n() });
        }
        in_u[v] = true;
    }
    let size = in_u.iter().filter(|&&b| b).count() as u64;
    let mut seen = vec![false; g.n()];
    let mut count = 0u64;
    for v in (0..g.n()).filter(|&v| in_u[v]) {
        for &(w, _) in g.neighbors(v) {
            if !in_u[w] && !seen[w] {
                seen[w] = true;
                count += 1;
            }
        }
    }
    Ok(Ratio::new(count, size))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpansionReport {
    pub min_ratio: Ratio<u64>,
    pub witness: Vec<VertexId>,
    pub sets_checked: u64,
    pub exhaustive: bool,
}

pub const EXHAUSTIVE_EXPANSION_LIMIT: usize = 16;

/// Worst observed `|N(U)|/|U|` over `1 <= |U| <= n/2`. Exhaustive for small n;
/// otherwise `trials` random sets plus every BFS ball around every vertex.
pub fn expansion_check(g: &CapacitatedGraph, trials: usize, seed: u64) -> ExpansionReport {
    let n = g.n();
    if n < 2 {
        return ExpansionReport {
            min_ratio: Ratio::from_integer(0),
            witness: Vec::new(),
            sets_checked: 0,
            exhaustive: true,
        };
    }
    if n <= EXHAUSTIVE_EXPANSION_LIMIT {
        return expansion_exhaustive(g);
    }
    let half = n / 2;
    let mut best: Option<(Ratio<u64>, Vec<VertexId>)> = None;
    let mut checked = 0u64;
    let mut offer = |r: Ratio<u64>, witness: &dyn Fn() -> Vec<VertexId>| {
        if best.as_ref().is_none_or(|(b, _)| r < *b) {
            best = Some((r, witness()));
        }
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let size = rng.gen_range(1..=half);
        let mut set = sample(&mut rng, n, size).into_vec();
        set.sort_unstable();
        let r = neighborhood_ratio(g, &set).expect("sampled set is valid");
        checked += 1;
        offer(r, &|| set.clone());
    }

    // The neighbourhood of the radius-i ball is exactly layer i + 1.
    let mut dist = vec![u32::MAX; n];
    let mut queue = VecDeque::with_capacity(n);
    let mut layer_sizes: Vec<u64> = Vec::new();
    for center in 0..n {
        dist.iter_mut().for_each(|d| *d = u32::MAX);
        layer_sizes.clear();
        dist[center] = 0;
        queue.push_back(center);
        while let Some(x) = queue.pop_front() {
            let dx = dist[x];
            if layer_sizes.len() <= dx as usize {
                layer_sizes.push(0);
            }
            layer_sizes[dx as usize] += 1;
            for &(y, _) in g.neighbors(x) {
                if dist[y] == u32::MAX {
                    dist[y] = dx + 1;
                    queue.push_back(y);
                }
            }
        }
        let mut ball = 0u64;
        for i in 0..layer_sizes.len() {
            ball += layer_sizes[i];
            if ball as usize > half {
                break;
            }
            let boundary = layer_sizes.get(i + 1).copied().unwrap_or(0);
            checked += 1;
            let radius = i as u32;
            let snapshot = dist.clone();
            offer(Ratio::new(boundary, ball), &|| {
                (0..n).filter(|&v| snapshot[v] <= radius).collect()
            });
        }
    }
    let (min_ratio, witness) = best.expect("at least one ball of size 1 exists");
    ExpansionReport {
        min_ratio,
        witness,
        sets_checked: checked,
        exhaustive: false,
    }
}

fn expansion_exhaustive(g: &CapacitatedGraph) -> ExpansionReport {
    let n = g.n();
    let mask: Vec<u32> = (0..n)
        .map(|v| g.neighbors(v).iter().fold(0u32, |m, &(w, _)| m | (1 << w)))
        .collect();
    let mut best: Option<(Ratio<u64>, u32)> = None;
    let mut checked = 0;
    for set in 1u32..(1 << n) {
        let size = set.count_ones() as usize;
        if size > n / 2 {
            continue;
        }
        let nb = (0..n)
            .filter(|&v| set >> v & 1 == 1)
            .fold(0u32, |m, v| m | mask[v])
            & !set;
        let r = Ratio::new(nb.count_ones() as u64, size as u64);
        checked += 1;
        if best.is_none_or(|(b, _)| r < b) {
            best = Some((r, set));
        }
    }
    let (min_ratio, set) = best.expect("n >= 2 gives a singleton");
    ExpansionReport {
        min_ratio,
        witness: (0..n).filter(|&v| set >> v & 1 == 1).collect(),
        sets_checked: checked,
        exhaustive: true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(n: usize, edges: &[(usize, usize)]) -> CapacitatedGraph {
        let e: Vec<_> = edges.iter().map(|&(u, v)| (u, v, 1)).collect();
        CapacitatedGraph::new(n, &e, vec![]).unwrap()
    }

    #[test]
    fn two_vertices_three_matchings() {
        let g = gen_matching_union(ExpanderSpec::new(2, 3, 1)).unwrap();
        assert_eq!(g.edge_count(), 3);
        assert!(g.edges().iter().all(|e| (e.u.min(e.v), e.u.max(e.v)) == (0, 1)));
        assert_eq!(g.degree(0), 3);
    }

    #[test]
    fn six_vertices_ten_regular() {
        let g = gen_matching_union(ExpanderSpec::new(6, 10, 99)).unwrap();
        assert_eq!(g.edge_count(), 30);
        assert!((0..6).all(|v| g.degree(v) == 10));
        assert!(g.edges().iter().all(|e| e.cap == 1));
    }

    #[test]
    fn generation_is_deterministic() {
        let a = gen_matching_union(ExpanderSpec::new(64, 10, 5)).unwrap();
        let b = gen_matching_union(ExpanderSpec::new(64, 10, 5)).unwrap();
        let c = gen_matching_union(ExpanderSpec::new(64, 10, 6)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn odd_n_rejected() {
        assert!(gen_matching_union(ExpanderSpec::new(7, 10, 0)).is_err());
    }

    #[test]
    fn disjoint_edges_have_zero_conductance() {
        let g = graph(4, &[(0, 1), (2, 3)]);
        assert_eq!(conductance_brute(&g).unwrap(), Ratio::from_integer(0));
        assert!(matches!(spectral_lower_bound(&g), Err(Error::Disconnected)));
    }

    #[test]
    fn conductance_guard() {
        let g = graph(21, &[]);
        assert!(matches!(conductance_brute(&g), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn star_and_edge_ratios() {
        let star = graph(6, &[(0, 1), (0, 2), (0, 3), (0, 4), (0, 5)]);
        assert_eq!(neighborhood_ratio(&star, &[0]).unwrap(), Ratio::from_integer(5));
        let edge = graph(2, &[(0, 1)]);
        assert_eq!(neighborhood_ratio(&edge, &[0]).unwrap(), Ratio::from_integer(1));
        let rep = expansion_check(&edge, 0, 0);
        assert!(rep.exhaustive);
        assert_eq!(rep.min_ratio, Ratio::from_integer(1));
    }

    #[test]
    fn sampled_check_finds_path_bottleneck() {
        // long path: the ball of radius 8 around an end has one neighbour
        let edges: Vec<_> = (0..39).map(|i| (i, i + 1)).collect();
        let g = graph(40, &edges);
        let rep = expansion_check(&g, 50, 3);
        assert!(!rep.exhaustive);
        assert_eq!(rep.min_ratio, Ratio::new(1, 20));
        assert_eq!(neighborhood_ratio(&g, &rep.witness).unwrap(), rep.min_ratio);
    }
}
