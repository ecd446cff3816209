//! Diagrammatic evaluation of the Lindstedt coefficients.
//!
//! A tree is stored as an arena in preorder; node `0` is the root and every
//! node owns the line leaving it towards its parent (node `0` owns the root
//! line). Children are ordered, so every planar arrangement is a separate
//! tree and node factors carry the matching `1/s!`.
//!
//! Node kinds:
//!
//! * *forcing* nodes carry a mode `ν_v` of the right-hand side and `s_v`
//!   children; their factor is the degree-`s_v` Taylor coefficient of that
//!   mode contracted with the children's line values;
//! * *badge* nodes (`ρ_v = 0`) carry `−δ_p` of their line and one child of
//!   the same momentum;
//! * the *stub* stands for the entering line of a self-energy graph.

mod canonical;
mod chain;
mod clusters;
mod enumerate;
mod value;

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::models::ModelError;
use crate::series::{Mode, SeriesError};

pub use canonical::{
    catalan, group_by_rerooting, planar_shape, planar_shapes, unrooted_canonical, RerootGroup,
};
pub use chain::{factorial_chain_tree, fit_chain_growth, ChainFit, ChainTree};
pub use clusters::{
    cluster_momentum, scale_decomposition, siegel_bryuno_check, Cluster, ClusterReport, ScaleMargin,
    SiegelBryunoReport,
};
pub use enumerate::{TreeContext, DEFAULT_ENUM_MAX};
pub use value::{verify_trees, verify_trees_with, TreeVerification, VerifiedMode};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TreeError {
    #[error("tree enumeration at order {order} exceeds the budget (maximum order {max})")]
    OrderBudget { order: usize, max: usize },
    #[error("tree enumeration produced more than {limit} trees")]
    CountBudget { limit: usize },
    #[error("vanishing propagator denominator on a line of momentum {nu}")]
    ZeroDenominator { nu: Mode },
    #[error("tree sum and recursion disagree at order {order}, ν = {nu}: relative error {rel_error:e}")]
    Mismatch {
        order: usize,
        nu: Mode,
        rel_error: f64,
    },
    #[error("Siegel-Bryuno bound violated on scale {scale}: {n_star} lines against bound {bound}")]
    SiegelBryuno { scale: i32, n_star: usize, bound: f64 },
    #[error("invalid request: {0}")]
    Invalid(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Forcing,
    Badge { p: usize },
    Stub,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Node {
    pub kind: NodeKind,
    /// `ν_v` (zero for badges and the stub).
    pub mode: Mode,
    /// Contribution `k_v` to the order.
    pub order: usize,
    /// Momentum of the line leaving the node. On a self-energy path this
    /// excludes the entering momentum.
    pub momentum: Mode,
    pub children: Vec<usize>,
    pub parent: Option<usize>,
    /// The node lies on the path from the stub to the root.
    pub on_path: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LabeledTree {
    nodes: Vec<Node>,
}

impl LabeledTree {
    pub(crate) fn leaf(kind: NodeKind, mode: Mode, order: usize, momentum: Mode) -> Self {
        LabeledTree {
            nodes: vec![Node {
                on_path: kind == NodeKind::Stub,
                kind,
                mode,
                order,
                momentum,
                children: Vec::new(),
                parent: None,
            }],
        }
    }

    /// New root above the given subtrees, in order.
    pub(crate) fn join(
        kind: NodeKind,
        mode: Mode,
        order: usize,
        momentum: Mode,
        children: &[&LabeledTree],
    ) -> Self {
        let total: usize = 1 + children.iter().map(|c| c.len()).sum::<usize>();
        let mut nodes = Vec::with_capacity(total);
        nodes.push(Node {
            kind,
            mode,
            order,
            momentum,
            children: Vec::with_capacity(children.len()),
            parent: None,
            on_path: children.iter().any(|c| c.nodes[0].on_path),
        });
        for c in children {
            let offset = nodes.len();
            nodes[0].children.push(offset);
            for (i, n) in c.nodes.iter().enumerate() {
                let mut n = n.clone();
                n.parent = Some(if i == 0 { 0 } else { n.parent.unwrap() + offset });
                for ch in n.children.iter_mut() {
                    *ch += offset;
                }
                nodes.push(n);
            }
        }
        LabeledTree { nodes }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn root(&self) -> &Node {
        &self.nodes[0]
    }

    /// `k(θ) = Σ_v k_v`.
    pub fn order(&self) -> usize {
        self.nodes.iter().map(|n| n.order).sum()
    }

    /// Momentum of the root line.
    pub fn momentum(&self) -> &Mode {
        &self.nodes[0].momentum
    }

    /// `K(θ) = Σ_v |ν_v|₁`.
    pub fn mode_weight(&self) -> u32 {
        self.nodes.iter().map(|n| n.mode.l1()).sum()
    }

    /// Check `ν_ℓv = ν_v + Σ_{children} ν_ℓ` at every node.
    pub fn conservation_holds(&self) -> bool {
        self.nodes.iter().all(|n| {
            let mut m = n.mode.clone();
            for &c in &n.children {
                m = m.add(&self.nodes[c].momentum);
            }
            m == n.momentum
        })
    }
}

impl fmt::Display for LabeledTree {
    /// Nested parenthesized labels: `([1] ([-1]) (b1 ([2])))`, badges `bp`,
    /// the stub `*`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn rec(t: &LabeledTree, v: usize, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            let n = &t.nodes[v];
            write!(f, "(")?;
            match n.kind {
                NodeKind::Forcing => {
                    write!(f, "[")?;
                    for (i, x) in n.mode.0.iter().enumerate() {
                        if i > 0 {
                            write!(f, ",")?;
                        }
                        write!(f, "{x}")?;
                    }
                    write!(f, "]")?;
                }
                NodeKind::Badge { p } => write!(f, "b{p}")?,
                NodeKind::Stub => write!(f, "*")?,
            }
            for &c in &n.children {
                write!(f, " ")?;
                rec(t, c, f)?;
            }
            write!(f, ")")
        }
        rec(self, 0, f)
    }
}
