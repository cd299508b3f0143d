//! Terminal placement, BFS layers around the terminals, the capacity tree and
//! the final edge capacities of the hard instance.

use log::warn;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::expander::{gen_matching_union, ExpanderSpec};
use crate::graph::{bfs_from, CapacitatedGraph, EdgeId, VertexId};

/// At desk scale the pair-budget formula exceeds `n`; it is capped at `n / M_CAP_DIVISOR`.
pub const M_CAP_DIVISOR: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct InstanceParams {
    pub n: usize,
    pub d: usize,
    pub epsilon: f64,
    pub k: usize,
    pub m: usize,
    pub seed: u64,
    /// Seeded uniform terminal sample instead of `0..k`.
    pub sample_terminals: bool,
    pub warnings: Vec<String>,
}

pub fn alpha(epsilon: f64) -> f64 {
    let l5 = 5f64.log2();
    l5 / (l5 + 1.0 - epsilon)
}

pub fn beta(epsilon: f64) -> f64 {
    let l5 = 5f64.log2();
    (l5 - 0.5 * epsilon) / (l5 + 1.0 - epsilon)
}

impl InstanceParams {
    /// Formula defaults for `k` and `m`, clamped into a usable range.
    pub fn new(n: usize, d: usize, epsilon: f64, seed: u64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::config("epsilon", format!("must lie in (0, 1), got {epsilon}")));
        }
        if n < 4 {
            return Err(Error::config("n", format!("need n >= 4, got {n}")));
        }
        let mut warnings = Vec::new();
        let la = (n as f64).log2().powf(alpha(epsilon));

        let k_raw = (n as f64 / la.exp2()).floor();
        let k = if k_raw < 2.0 {
            warnings.push(format!("k formula gives {k_raw}, clamped to 2"));
            2
        } else {
            k_raw as usize
        };

        let m_raw = (10.0 * n as f64 / la).floor();
        let cap = (n / M_CAP_DIVISOR).max(1);
        let m = if m_raw < 1.0 {
            warnings.push(format!("m formula gives {m_raw}, clamped to 1"));
            1
        } else if m_raw as usize > cap {
            warnings.push(format!("m formula gives {m_raw}, capped at n/{M_CAP_DIVISOR} = {cap}"));
            cap
        } else {
            m_raw as usize
        };
        Ok(InstanceParams {
            n,
            d,
            epsilon,
            k,
            m,
            seed,
            sample_terminals: false,
            warnings,
        })
    }

    pub fn alpha(&self) -> f64 {
        alpha(self.epsilon)
    }

    pub fn beta(&self) -> f64 {
        beta(self.epsilon)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 1 || self.k > self.n {
            return Err(Error::config("k", format!("need 1 <= k <= n, got {}", self.k)));
        }
        if self.m < 1 {
            return Err(Error::config("m", "need m >= 1"));
        }
        if 2 * self.m > self.n {
            return Err(Error::config("m", format!("2m = {} exceeds n = {}", 2 * self.m, self.n)));
        }
        Ok(())
    }
}

/// Default terminals are `0..k`; with `sample` a seeded uniform k-subset.
pub fn pick_terminals(g: &CapacitatedGraph, k: usize, sample_seed: Option<u64>) -> Result<CapacitatedGraph> {
    if k > g.n() {
        return Err(Error::InvalidInput(format!("k = {k} exceeds n = {}", g.n())));
    }
    let terminals = match sample_seed {
        None => (0..k).collect(),
        Some(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7e72_a11e);
            let mut t = sample(&mut rng, g.n(), k).into_vec();
            t.sort_unstable();
            t
        }
    };
    g.clone().with_terminals(terminals)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerDecomposition {
    /// Distance to the nearest terminal, `None` if unreachable.
    pub dist: Vec<Option<u32>>,
    /// N_0, N_1, ... each ascending.
    pub layers: Vec<Vec<VertexId>>,
    /// |B_i|
    pub ball_sizes: Vec<usize>,
    pub r: usize,
    pub warnings: Vec<String>,
}

impl LayerDecomposition {
    pub fn layer(&self, i: usize) -> &[VertexId] {
        self.layers.get(i).map_or(&[], Vec::as_slice)
    }

    /// V_T = B_r
    pub fn ball_r(&self) -> usize {
        self.ball_sizes[self.r]
    }
}

/// Exact BFS layers from the terminal set and `r = min{i : |B_i| >= 2m} - 1`.
pub fn layer_decomposition(g: &CapacitatedGraph, m: usize) -> Result<LayerDecomposition> {
    if g.terminals().is_empty() {
        return Err(Error::InvalidInput("layer decomposition needs terminals".into()));
    }
    let dist = bfs_from(g, g.terminals());
    let depth = dist.iter().flatten().copied().max().unwrap_or(0) as usize;
    let mut layers = vec![Vec::new(); depth + 1];
    for (v, d) in dist.iter().enumerate() {
        if let Some(d) = d {
            layers[*d as usize].push(v);
        }
    }
    let ball_sizes: Vec<usize> = layers
        .iter()
        .scan(0, |acc, l| {
            *acc += l.len();
            Some(*acc)
        })
        .collect();
    let mut warnings = Vec::new();
    let r = match ball_sizes.iter().position(|&b| b >= 2 * m) {
        Some(0) => {
            warnings.push(format!("|B_0| = {} >= 2m = {}: r = 0, capacity tree empty", ball_sizes[0], 2 * m));
            0
        }
        Some(i) => i - 1,
        None => {
            warnings.push(format!(
                "no ball reaches 2m = {}; using the deepest layer r = {depth}",
                2 * m
            ));
            depth
        }
    };
    for w in &warnings {
        warn!("{w}");
    }
    Ok(LayerDecomposition {
        dist,
        layers,
        ball_sizes,
        r,
        warnings,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CapacityTree {
    /// e_u for every u in N_1..N_r.
    pub parent_edge: Vec<Option<EdgeId>>,
    /// c′ indexed by edge id; `None` off the tree.
    pub weight: Vec<Option<u64>>,
    /// c′(E_i) for i = 1..=r, stored at index i - 1.
    pub level_weights: Vec<u64>,
    /// |E_{r+1}|, edges between N_r and N_{r+1}.
    pub boundary: u64,
    pub r: usize,
}

impl CapacityTree {
    pub fn edges(&self) -> impl Iterator<Item = (EdgeId, u64)> + '_ {
        self.weight.iter().enumerate().filter_map(|(e, w)| w.map(|w| (e, w)))
    }

    pub fn total_weight(&self) -> u128 {
        self.level_weights.iter().map(|&w| w as u128).sum()
    }

    /// c′(E_i) = c′(E_{i+1}) for 1 <= i < r and c′(E_r) = |E_{r+1}|.
    pub fn check_telescoping(&self) -> Result<()> {
        for (i, w) in self.level_weights.windows(2).enumerate() {
            if w[0] != w[1] {
                return Err(Error::Invariant(format!(
                    "c'(E_{}) = {} but c'(E_{}) = {}",
                    i + 1,
                    w[0],
                    i + 2,
                    w[1]
                )));
            }
        }
        if let Some(&last) = self.level_weights.last() {
            if last != self.boundary {
                return Err(Error::Invariant(format!(
                    "c'(E_r) = {last} but |E_(r+1)| = {}",
                    self.boundary
                )));
            }
        }
        Ok(())
    }
}

/// Every u in N_i (1 <= i <= r) takes as parent edge the edge to its lowest-id
/// neighbour in N_{i-1}, lowest edge id among parallels. Weights flow inward
/// from the boundary E_{r+1}.
pub fn build_capacity_tree(g: &CapacitatedGraph, layers: &LayerDecomposition) -> CapacityTree {
    let r = layers.r;
    let n = g.n();
    let mut parent_edge = vec![None; n];
    let mut parent = vec![usize::MAX; n];
    let mut weight = vec![None; g.edge_count()];
    let mut acc = vec![0u64; n];
    let at = |v: VertexId, i: usize| layers.dist[v] == Some(i as u32);

    let mut boundary = 0;
    if r > 0 {
        for &u in layers.layer(r) {
            let out = g.neighbors(u).iter().filter(|&&(w, _)| at(w, r + 1)).count() as u64;
            acc[u] = out;
            boundary += out;
        }
    }
    let mut level_weights = vec![0u64; r];
    for i in (1..=r).rev() {
        for &u in layers.layer(i) {
            let (p, e) = g
                .neighbors(u)
                .iter()
                .filter(|&&(w, _)| at(w, i - 1))
                .min()
                .copied()
                .expect("BFS layer i vertex has a neighbour in layer i - 1");
            parent_edge[u] = Some(e);
            parent[u] = p;
            weight[e] = Some(acc[u]);
            level_weights[i - 1] += acc[u];
            if i > 1 {
                acc[p] += acc[u];
            }
        }
    }
    CapacityTree {
        parent_edge,
        weight,
        level_weights,
        boundary,
        r,
    }
}

/// c(e) = max{c′(e), 1} on tree edges and 1 elsewhere.
pub fn assign_capacities(g: &CapacitatedGraph, tree: &CapacityTree) -> CapacitatedGraph {
    let caps: Vec<u64> = tree.weight.iter().map(|w| w.map_or(1, |w| w.max(1))).collect();
    g.with_capacities(&caps).expect("one weight slot per edge")
}

pub fn total_capacity(g: &CapacitatedGraph) -> u128 {
    g.total_capacity()
}

/// A finalized instance together with the intermediate structures.
#[derive(Debug, Clone)]
pub struct Instance {
    pub params: InstanceParams,
    pub graph: CapacitatedGraph,
    pub layers: LayerDecomposition,
    pub tree: CapacityTree,
}

impl Instance {
    /// c(E) <= |E| + c′(E_T) = |E| + r |E_{r+1}|, and every capacity >= 1.
    pub fn check_capacity_bounds(&self) -> Result<()> {
        if let Some(e) = self.graph.edges().iter().find(|e| e.cap < 1) {
            return Err(Error::Invariant(format!("edge {} has capacity 0", e.id)));
        }
        let bound = self.graph.edge_count() as u128 + self.tree.r as u128 * self.tree.boundary as u128;
        if self.graph.total_capacity() > bound {
            return Err(Error::Invariant(format!(
                "c(E) = {} exceeds |E| + r|E_(r+1)| = {bound}",
                self.graph.total_capacity()
            )));
        }
        Ok(())
    }
}

pub fn build_instance(params: &InstanceParams) -> Result<Instance> {
    params.validate()?;
    let g = gen_matching_union(ExpanderSpec::new(params.n, params.d, params.seed))?;
    let g = pick_terminals(&g, params.k, params.sample_terminals.then_some(params.seed))?;
    let layers = layer_decomposition(&g, params.m)?;
    let tree = build_capacity_tree(&g, &layers);
    let graph = assign_capacities(&g, &tree);
    Ok(Instance {
        params: params.clone(),
        graph,
        layers,
        tree,
    })
}
