use std::collections::BTreeMap;

use serde::Serialize;

use super::{LabeledTree, NodeKind};
use crate::diophantine::{scale_of, RotationVector};
use crate::series::Mode;

/// Maximal connected set of nodes joined by lines of scale `≤ n`, with at
/// least one internal line of scale exactly `n`. Lines are named by the node
/// they leave.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Cluster {
    pub scale: i32,
    pub nodes: Vec<usize>,
    pub internal_lines: Vec<usize>,
    pub entering: Vec<usize>,
    pub exiting: Option<usize>,
    /// One entering line with the same momentum as the exiting one.
    pub self_energy: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClusterReport {
    pub gamma: f64,
    /// Scale of each line, `−1` for zero momentum.
    pub line_scales: Vec<i32>,
    pub clusters: Vec<Cluster>,
    /// Nodes forming a self-energy cluster on their own: one child and
    /// `ν_v = 0`.
    pub single_node_self_energy: Vec<usize>,
    /// `𝔑_n`: lines on scale `n`.
    pub lines_on_scale: BTreeMap<i32, usize>,
    /// `𝔖_n`: lines on scale `n` leaving a self-energy cluster.
    pub self_energy_exits: BTreeMap<i32, usize>,
    /// `𝔑*_n = 𝔑_n − 𝔖_n`.
    pub non_resonant: BTreeMap<i32, usize>,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, mut a: usize) -> usize {
        while self.0[a] != a {
            self.0[a] = self.0[self.0[a]];
            a = self.0[a];
        }
        a
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Components of the node graph joined by the non-root lines whose scale
/// satisfies `keep`. The root line ends at the root, which is not a node, so
/// it is always external.
fn components(tree: &LabeledTree, scales: &[i32], keep: impl Fn(i32) -> bool) -> UnionFind {
    let nodes = tree.nodes();
    let mut uf = UnionFind::new(nodes.len());
    for (v, node) in nodes.iter().enumerate() {
        if let Some(p) = node.parent {
            if keep(scales[v]) {
                uf.union(v, p);
            }
        }
    }
    uf
}

fn describe(tree: &LabeledTree, members: &[usize], scale: i32) -> Cluster {
    let nodes = tree.nodes();
    let inside = |v: usize| members.binary_search(&v).is_ok();
    let mut internal = Vec::new();
    let mut entering = Vec::new();
    let mut exiting = None;
    for &v in members {
        match nodes[v].parent {
            Some(p) if inside(p) => internal.push(v),
            _ => exiting = Some(v),
        }
        for &c in &nodes[v].children {
            if !inside(c) {
                entering.push(c);
            }
        }
    }
    let self_energy = match (exiting, entering.as_slice()) {
        (Some(e), [only]) => nodes[e].momentum == nodes[*only].momentum,
        _ => false,
    };
    Cluster {
        scale,
        nodes: members.to_vec(),
        internal_lines: internal,
        entering,
        exiting,
        self_energy,
    }
}

fn single_node_se(tree: &LabeledTree, v: usize) -> bool {
    let n = &tree.nodes()[v];
    n.children.len() == 1 && n.mode.is_zero() && n.kind != NodeKind::Stub
}

/// Clusters on every scale `n ≥ 0` and the counts entering the
/// Siegel-Bryuno bound.
pub fn scale_decomposition(tree: &LabeledTree, omega: &RotationVector, gamma: f64) -> ClusterReport {
    let nodes = tree.nodes();
    let len = nodes.len();
    let scales: Vec<i32> = nodes.iter().map(|n| scale_of(&n.momentum, omega, gamma)).collect();
    let top = scales.iter().copied().max().unwrap_or(-1);
    let mut clusters = Vec::new();
    for n in 0..=top {
        let mut uf = components(tree, &scales, |s| s <= n);
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for v in 0..len {
            let r = uf.find(v);
            groups.entry(r).or_default().push(v);
        }
        for (r, members) in groups {
            let has_scale_n = members
                .iter()
                .any(|&v| scales[v] == n && nodes[v].parent.is_some_and(|p| uf.find(p) == r));
            if has_scale_n {
                clusters.push(describe(tree, &members, n));
            }
        }
    }

    let mut lines_on_scale = BTreeMap::new();
    let mut se_exits = BTreeMap::new();
    for v in 0..len {
        if scales[v] < 0 {
            continue;
        }
        *lines_on_scale.entry(scales[v]).or_insert(0usize) += 1;
        // T_max(ℓ_v): the component of v under lines of smaller scale.
        let n = scales[v];
        let mut uf = components(tree, &scales, |s| s < n);
        let r = uf.find(v);
        let members: Vec<usize> = (0..len).filter(|&w| uf.find(w) == r).collect();
        let is_se = if members == [v] {
            single_node_se(tree, v)
        } else {
            describe(tree, &members, n - 1).self_energy
        };
        if is_se {
            *se_exits.entry(n).or_insert(0usize) += 1;
        }
    }
    let non_resonant = lines_on_scale
        .iter()
        .map(|(&n, &c)| (n, c - se_exits.get(&n).copied().unwrap_or(0)))
        .collect();
    ClusterReport {
        gamma,
        single_node_self_energy: (0..len).filter(|&v| single_node_se(tree, v)).collect(),
        line_scales: scales,
        clusters,
        lines_on_scale,
        self_energy_exits: se_exits,
        non_resonant,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScaleMargin {
    pub scale: i32,
    pub n_star: usize,
    /// `c 2^{−n/τ} K(θ)`.
    pub bound: f64,
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SiegelBryunoReport {
    pub c: f64,
    pub tau: f64,
    pub mode_weight: u32,
    pub scales: Vec<ScaleMargin>,
    /// `min_n (bound − 𝔑*_n)`, `+∞` when no line has a nonnegative scale.
    pub worst_margin: f64,
    pub holds: bool,
}

/// `𝔑*_n(θ) ≤ c 2^{−n/τ} K(θ)` with `c = 2^{2+1/τ}` on every scale.
pub fn siegel_bryuno_check(tree: &LabeledTree, omega: &RotationVector, gamma: f64, tau: f64) -> SiegelBryunoReport {
    let rep = scale_decomposition(tree, omega, gamma);
    let c = 2f64.powf(2.0 + 1.0 / tau);
    let k = tree.mode_weight();
    let scales: Vec<ScaleMargin> = rep
        .non_resonant
        .iter()
        .map(|(&n, &ns)| {
            let bound = c * 2f64.powf(-(n as f64) / tau) * k as f64;
            ScaleMargin {
                scale: n,
                n_star: ns,
                bound,
                margin: bound - ns as f64,
            }
        })
        .collect();
    let worst = scales.iter().map(|s| s.margin).fold(f64::INFINITY, f64::min);
    SiegelBryunoReport {
        c,
        tau,
        mode_weight: k,
        holds: worst >= 0.0,
        scales,
        worst_margin: worst,
    }
}

/// Momentum flowing out of a set of nodes, `Σ_{v∈T} ν_v`.
pub fn cluster_momentum(tree: &LabeledTree, members: &[usize]) -> Mode {
    let d = tree.root().mode.dim();
    members
        .iter()
        .fold(Mode::zero(d), |acc, &v| acc.add(&tree.nodes()[v].mode))
}
