//! Hierarchical clustering over the clusters of a partition.
//!
//! Level 0 works on the clusters themselves. Each level classifies the current
//! groups as good or bad by the size of their friendly neighbourhood, then
//! merges good groups around greedily chosen centres; bad leftovers are set
//! aside. Groups are always represented as sorted lists of base cluster ids.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::graph::{CapacitatedGraph, ClusterId, EdgeId, Partition};
use crate::surgery::beta;

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterParams {
    pub s: f64,
    /// 2 − λ, the exponent growth per level.
    pub growth: f64,
    pub levels: usize,
    /// Fractions of n.
    pub useless_budget: f64,
    pub bad_budget: f64,
    pub bad0_budget: f64,
    pub purity: f64,
    /// Names of fields set explicitly rather than by formula.
    pub overrides: Vec<String>,
}

impl ClusterParams {
    pub fn from_formulas(n: usize, epsilon: f64) -> Self {
        let lg = (n as f64).log2();
        let b = beta(epsilon);
        let eta = 1.0 - epsilon / 2.0;
        let raw_l = ((1.0 - b) * lg.log2() - 7.0) / eta;
        ClusterParams {
            s: lg.powf(b).exp2().max(2.0),
            growth: eta.exp2(),
            levels: if raw_l.floor() < 1.0 { 1 } else { raw_l.floor() as usize },
            useless_budget: 1.0 / 200.0,
            bad_budget: 0.96,
            bad0_budget: 0.24,
            purity: 7.0 / 8.0,
            overrides: Vec::new(),
        }
    }

    /// s_i = s^{(2−λ)^i}
    pub fn threshold(&self, i: usize) -> f64 {
        self.s.powf(self.growth.powi(i as i32))
    }

    pub fn validate(&self) -> Result<()> {
        // NaN fails both checks
        if self.s.is_nan() || self.s < 2.0 {
            return Err(Error::config("s", format!("need s >= 2, got {}", self.s)));
        }
        if self.growth.is_nan() || self.growth <= 1.0 {
            return Err(Error::config("growth", format!("thresholds must increase, got {}", self.growth)));
        }
        if self.levels < 1 {
            return Err(Error::config("levels", "need at least one level"));
        }
        Ok(())
    }
}

/// The level-0 friendship graph H⁰ over base clusters. Two clusters are
/// friends when an edge joins non-useless vertices of both; each adjacency
/// keeps the lowest such edge id as witness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FriendGraph {
    /// (neighbour, witness edge), ascending by neighbour; never contains self.
    pub adj: Vec<Vec<(ClusterId, EdgeId)>>,
    /// Vertex count of every base cluster, useless vertices included.
    pub sizes: Vec<usize>,
}

pub fn build_friendship_graph(g: &CapacitatedGraph, p: &Partition, useless: &[bool]) -> FriendGraph {
    let f = p.cluster_count();
    let mut adj: Vec<Vec<(ClusterId, EdgeId)>> = vec![Vec::new(); f];
    for e in g.edges() {
        if useless[e.u] || useless[e.v] {
            continue;
        }
        let (a, b) = (p.cluster_of(e.u), p.cluster_of(e.v));
        if a != b {
            adj[a].push((b, e.id));
            adj[b].push((a, e.id));
        }
    }
    for list in &mut adj {
        // edges were visited in id order, so the first entry per neighbour is the lowest
        list.sort_by_key(|&(c, e)| (c, e));
        list.dedup_by_key(|x| x.0);
    }
    FriendGraph { adj, sizes: p.sizes() }
}

impl FriendGraph {
    pub fn cluster_count(&self) -> usize {
        self.adj.len()
    }

    pub fn witness(&self, a: ClusterId, b: ClusterId) -> Option<EdgeId> {
        self.adj[a]
            .binary_search_by_key(&b, |x| x.0)
            .ok()
            .map(|i| self.adj[a][i].1)
    }

    /// BFS in H⁰ restricted to `allowed` clusters (`None` = all).
    pub fn bfs(&self, src: ClusterId, allowed: Option<&[bool]>) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.cluster_count()];
        dist[src] = Some(0);
        let mut queue = VecDeque::from([src]);
        while let Some(x) = queue.pop_front() {
            let dx = dist[x].unwrap();
            for &(y, _) in &self.adj[x] {
                if dist[y].is_none() && allowed.is_none_or(|a| a[y]) {
                    dist[y] = Some(dx + 1);
                    queue.push_back(y);
                }
            }
        }
        dist
    }

    /// Shortest path in H⁰ with neighbours explored in ascending id order.
    pub fn shortest_path(&self, from: ClusterId, to: ClusterId) -> Option<Vec<ClusterId>> {
        let mut prev = vec![usize::MAX; self.cluster_count()];
        prev[from] = from;
        let mut queue = VecDeque::from([from]);
        while let Some(x) = queue.pop_front() {
            if x == to {
                break;
            }
            for &(y, _) in &self.adj[x] {
                if prev[y] == usize::MAX {
                    prev[y] = x;
                    queue.push_back(y);
                }
            }
        }
        if prev[to] == usize::MAX {
            return None;
        }
        let mut path = vec![to];
        while *path.last().unwrap() != from {
            path.push(prev[*path.last().unwrap()]);
        }
        path.reverse();
        Some(path)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusteringState {
    /// Index i of the current family ℋ^i.
    pub level: usize,
    /// ℋ^i: groups of base clusters, each sorted.
    pub family: Vec<Vec<ClusterId>>,
    /// C^0 .. C^{i−1}, base clusters set aside at each level.
    pub discarded: Vec<Vec<ClusterId>>,
    /// b_j = |V(C^j)|
    pub bad_sizes: Vec<usize>,
    /// ℋ^1 .. ℋ^i, kept for the diameter check.
    pub history: Vec<Vec<Vec<ClusterId>>>,
}

impl ClusteringState {
    pub fn initial(f: usize) -> Self {
        ClusteringState {
            level: 0,
            family: (0..f).map(|c| vec![c]).collect(),
            discarded: Vec::new(),
            bad_sizes: Vec::new(),
            history: Vec::new(),
        }
    }

    pub fn group_size(&self, fg: &FriendGraph, gid: usize) -> usize {
        self.family[gid].iter().map(|&c| fg.sizes[c]).sum()
    }

    pub fn total_bad(&self) -> usize {
        self.bad_sizes.iter().sum()
    }
}

/// Friend sets N⁺_i over the current family, each ascending and containing
/// the group itself.
pub fn family_friends(state: &ClusteringState, fg: &FriendGraph) -> Vec<Vec<usize>> {
    let mut group_of = vec![usize::MAX; fg.cluster_count()];
    for (gid, group) in state.family.iter().enumerate() {
        for &c in group {
            group_of[c] = gid;
        }
    }
    state
        .family
        .iter()
        .enumerate()
        .map(|(gid, group)| {
            let mut friends = vec![gid];
            for &c in group {
                for &(nb, _) in &fg.adj[c] {
                    let h = group_of[nb];
                    if h != usize::MAX {
                        friends.push(h);
                    }
                }
            }
            friends.sort_unstable();
            friends.dedup();
            friends
        })
        .collect()
}

/// good-i: the friendly node set has more than s_{i+1} vertices.
pub fn classify_level(state: &ClusteringState, fg: &FriendGraph, friends: &[Vec<usize>], params: &ClusterParams) -> Vec<bool> {
    let threshold = params.threshold(state.level + 1);
    let sizes: Vec<usize> = (0..state.family.len()).map(|g| state.group_size(fg, g)).collect();
    friends
        .iter()
        .map(|fs| fs.iter().map(|&h| sizes[h]).sum::<usize>() as f64 > threshold)
        .collect()
}

/// One round of merging: ℋ^i → ℋ^{i+1}, setting C^i aside.
pub fn cluster_level(state: &ClusteringState, fg: &FriendGraph, params: &ClusterParams) -> ClusteringState {
    let friends = family_friends(state, fg);
    let good = classify_level(state, fg, &friends, params);
    let count = state.family.len();
    let mut marked = vec![false; count];
    let mut owner = vec![usize::MAX; count];
    let mut groups: Vec<Vec<ClusterId>> = Vec::new();

    for h in 0..count {
        if good[h] && !marked[h] && friends[h].iter().all(|&x| !marked[x]) {
            let k = groups.len();
            let mut members = Vec::new();
            for &x in &friends[h] {
                marked[x] = true;
                owner[x] = k;
                members.extend_from_slice(&state.family[x]);
            }
            groups.push(members);
        }
    }
    let phase_one = marked.clone();
    for h in 0..count {
        if good[h] && !phase_one[h] {
            let anchor = friends[h]
                .iter()
                .copied()
                .find(|&x| phase_one[x])
                .expect("a good group left unmarked has a marked friend");
            marked[h] = true;
            groups[owner[anchor]].extend_from_slice(&state.family[h]);
        }
    }
    let mut discarded: Vec<ClusterId> = (0..count)
        .filter(|&h| !marked[h])
        .flat_map(|h| state.family[h].iter().copied())
        .collect();
    discarded.sort_unstable();
    for g in &mut groups {
        g.sort_unstable();
    }

    let mut next = state.clone();
    next.level += 1;
    next.bad_sizes.push(discarded.iter().map(|&c| fg.sizes[c]).sum());
    next.discarded.push(discarded);
    next.history.push(groups.clone());
    next.family = groups;
    next
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HierarchyOutcome {
    Complete(ClusteringState),
    /// Bad vertices exceeded the budget after `level` rounds.
    Aborted { state: ClusteringState, level: usize },
}

impl HierarchyOutcome {
    pub fn state(&self) -> &ClusteringState {
        match self {
            HierarchyOutcome::Complete(s) | HierarchyOutcome::Aborted { state: s, .. } => s,
        }
    }

    pub fn is_complete(&self) -> bool {
        matches!(self, HierarchyOutcome::Complete(_))
    }
}

/// Runs `params.levels` rounds; aborts once Σ b_j exceeds the bad budget.
pub fn run_hierarchy(fg: &FriendGraph, n: usize, params: &ClusterParams) -> HierarchyOutcome {
    let budget = params.bad_budget * n as f64;
    let mut state = ClusteringState::initial(fg.cluster_count());
    for _ in 0..params.levels {
        state = cluster_level(&state, fg, params);
        if state.total_bad() as f64 > budget {
            let level = state.level;
            return HierarchyOutcome::Aborted { state, level };
        }
    }
    HierarchyOutcome::Complete(state)
}

/// Builds H⁰ for the given useless set and runs the hierarchy.
pub fn cluster(g: &CapacitatedGraph, p: &Partition, useless: &[bool], params: &ClusterParams) -> (FriendGraph, HierarchyOutcome) {
    let fg = build_friendship_graph(g, p, useless);
    let outcome = run_hierarchy(&fg, g.n(), params);
    (fg, outcome)
}

/// Largest H⁰ distance between two base clusters of the same group, per level
/// 1..=i, measured inside the group. Fails if any level-i group exceeds 5^i − 1.
pub fn cluster_diameter_check(state: &ClusteringState, fg: &FriendGraph) -> Result<Vec<usize>> {
    let mut allowed = vec![false; fg.cluster_count()];
    let mut out = Vec::with_capacity(state.history.len());
    for (idx, family) in state.history.iter().enumerate() {
        let level = idx + 1;
        let bound = 5usize.pow(level as u32) - 1;
        let mut worst = 0;
        for group in family {
            group.iter().for_each(|&c| allowed[c] = true);
            for &a in group {
                let dist = fg.bfs(a, Some(&allowed));
                for &b in group {
                    match dist[b] {
                        Some(d) if d <= bound => worst = worst.max(d),
                        d => {
                            return Err(Error::DiameterViolation {
                                level,
                                a,
                                b,
                                dist: d,
                                bound,
                            })
                        }
                    }
                }
            }
            group.iter().for_each(|&c| allowed[c] = false);
        }
        out.push(worst);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(s: f64, levels: usize) -> ClusterParams {
        ClusterParams {
            s,
            growth: 2.0,
            levels,
            useless_budget: 1.0,
            bad_budget: 0.96,
            bad0_budget: 0.24,
            purity: 0.875,
            overrides: vec![],
        }
    }

    fn unit(n: usize, edges: &[(usize, usize)]) -> CapacitatedGraph {
        let e: Vec<_> = edges.iter().map(|&(u, v)| (u, v, 1)).collect();
        CapacitatedGraph::new(n, &e, vec![]).unwrap()
    }

    #[test]
    fn friendship_respects_useless() {
        let g = unit(2, &[(0, 1)]);
        let p = Partition::singleton(2);
        let fg = build_friendship_graph(&g, &p, &[false, false]);
        assert_eq!(fg.witness(0, 1), Some(0));
        let fg = build_friendship_graph(&g, &p, &[true, true]);
        assert_eq!(fg.witness(0, 1), None);
        let st = ClusteringState::initial(2);
        let friends = family_friends(&st, &fg);
        assert_eq!(friends[0], vec![0]);
    }

    #[test]
    fn strict_threshold() {
        // s = 2, growth 2: s_1 = 4
        let g = unit(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]);
        let p = Partition::singleton(5);
        let fg = build_friendship_graph(&g, &p, &[false; 5]);
        let st = ClusteringState::initial(5);
        let friends = family_friends(&st, &fg);
        let good = classify_level(&st, &fg, &friends, &params(2.0, 1));
        // centre sees 5 > 4, leaves see 2
        assert_eq!(good, vec![true, false, false, false, false]);
        let g4 = unit(4, &[(0, 1), (0, 2), (0, 3)]);
        let fg4 = build_friendship_graph(&g4, &Partition::singleton(4), &[false; 4]);
        let st4 = ClusteringState::initial(4);
        let good = classify_level(&st4, &fg4, &family_friends(&st4, &fg4), &params(2.0, 1));
        assert!(!good[0], "|U+| = s_1 exactly is bad");
    }

    #[test]
    fn all_bad_and_all_friends() {
        let g = unit(3, &[]);
        let fg = build_friendship_graph(&g, &Partition::singleton(3), &[false; 3]);
        let next = cluster_level(&ClusteringState::initial(3), &fg, &params(2.0, 1));
        assert!(next.family.is_empty());
        assert_eq!(next.discarded[0], vec![0, 1, 2]);

        let k4 = unit(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        let fg = build_friendship_graph(&k4, &Partition::singleton(4), &[false; 4]);
        let p = ClusterParams { growth: 1.5, ..params(2.0, 1) };
        let next = cluster_level(&ClusteringState::initial(4), &fg, &p);
        assert_eq!(next.family, vec![vec![0, 1, 2, 3]]);
        assert_eq!(next.bad_sizes, vec![0]);
    }

    #[test]
    fn clique_hierarchy_survives() {
        let mut edges = Vec::new();
        for a in 0..8 {
            for b in a + 1..8 {
                edges.push((a, b));
            }
        }
        let g = unit(8, &edges);
        let p = Partition::singleton(8);
        let pr = ClusterParams {
            s: 2.0,
            growth: 1.2,
            levels: 3,
            ..params(2.0, 3)
        };
        let (fg, out) = cluster(&g, &p, &[false; 8], &pr);
        let st = out.state();
        assert!(out.is_complete());
        assert_eq!(st.family, vec![(0..8).collect::<Vec<_>>()]);
        assert_eq!(cluster_diameter_check(st, &fg).unwrap(), vec![1, 1, 1]);
    }

    #[test]
    fn huge_threshold_aborts() {
        let g = unit(4, &[(0, 1), (1, 2), (2, 3)]);
        let (_, out) = cluster(&g, &Partition::singleton(4), &[false; 4], &params(64.0, 1));
        assert!(matches!(out, HierarchyOutcome::Aborted { level: 1, .. }));
    }

    #[test]
    fn path_adoption_radius() {
        // path 0-1-2-3-4; only vertex 1 is good-0 when s_1 = 2.5 (friend-union 3)
        let g = unit(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]);
        let fg = build_friendship_graph(&g, &Partition::singleton(5), &[false; 5]);
        let p = ClusterParams {
            s: 2.5,
            growth: 1.0 + 1e-9,
            ..params(2.0, 1)
        };
        let next = cluster_level(&ClusteringState::initial(5), &fg, &p);
        // 1 is the first good cluster; 2 and 3 are good but 2 is marked, 3 joins via 2
        assert_eq!(next.family, vec![vec![0, 1, 2, 3]]);
        assert_eq!(next.discarded[0], vec![4]);
        assert_eq!(cluster_diameter_check(&next, &fg).unwrap(), vec![3]);
    }
}
