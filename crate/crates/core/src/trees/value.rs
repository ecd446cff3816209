use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::Serialize;

use super::enumerate::TreeContext;
use super::{clusters, LabeledTree, NodeKind, TreeError};
use crate::diophantine::DiophantineStamp;
use crate::models::solve_lindstedt_with;
use crate::models::SolveOptions;
use crate::numeric::CompensatedC;
use crate::series::Mode;

/// How the root line is closed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum Root {
    /// With its propagator: the tree's contribution to `u^{(k)}_ν`.
    Line,
    /// Without: the node factor alone.
    Bare,
}

impl TreeContext {
    /// Line values bottom-up. Path lines are evaluated at `ω·ν⁰ + x`; the
    /// stub's line carries `stub`.
    pub(crate) fn evaluate(
        &self,
        tree: &LabeledTree,
        stub: Option<&[C64]>,
        x: f64,
        root: Root,
    ) -> Result<Vec<C64>, TreeError> {
        let n = self.spec.dim_n();
        let nodes = tree.nodes();
        let mut vals: Vec<Vec<C64>> = vec![Vec::new(); nodes.len()];
        for v in (0..nodes.len()).rev() {
            let node = &nodes[v];
            let xl = self.omega.dot(&node.momentum) + if node.on_path { x } else { 0.0 };
            let factor: Vec<C64> = match node.kind {
                NodeKind::Stub => {
                    vals[v] = stub
                        .ok_or_else(|| TreeError::Invalid("graph has a stub but no entering value".into()))?
                        .to_vec();
                    continue;
                }
                NodeKind::Badge { p } => {
                    let dp = -self.spec.delta(p, xl);
                    vals[node.children[0]].iter().map(|z| z * dp).collect()
                }
                NodeKind::Forcing => {
                    let mut acc = vec![CompensatedC::default(); n];
                    for (sigma, c) in self.tensor_of(&node.mode, node.children.len()) {
                        let mut w = C64::new(1.0, 0.0);
                        for (i, &ch) in node.children.iter().enumerate() {
                            w *= vals[ch][sigma[i]];
                        }
                        for (a, ci) in acc.iter_mut().zip(c) {
                            a.add(ci * w);
                        }
                    }
                    acc.iter().map(CompensatedC::value).collect()
                }
            };
            vals[v] = if v == 0 && root == Root::Bare {
                factor
            } else if node.momentum.is_zero() && !node.on_path {
                let g = self.g.as_ref().ok_or_else(|| TreeError::ZeroDenominator {
                    nu: node.momentum.clone(),
                })?;
                (0..n)
                    .map(|r| (0..n).map(|c| factor[c] * g[(r, c)]).sum())
                    .collect()
            } else {
                let d0 = self.spec.delta(0, xl);
                if d0.norm() == 0.0 {
                    return Err(TreeError::ZeroDenominator { nu: node.momentum.clone() });
                }
                factor.iter().map(|z| z / d0).collect()
            };
        }
        Ok(std::mem::take(&mut vals[0]))
    }

    /// `Val(θ)`: the contribution of one tree to `u^{(k)}_ν`.
    pub fn tree_value(&self, tree: &LabeledTree) -> Result<Vec<C64>, TreeError> {
        self.evaluate(tree, None, 0.0, Root::Line)
    }

    /// `Σ_θ Val(θ)` over all trees of order `k` with root momentum `ν`.
    pub fn tree_sum(&mut self, k: usize, nu: &Mode) -> Result<Vec<C64>, TreeError> {
        let n = self.spec.dim_n();
        self.with_trees(k, nu, |ctx, trees| {
            let mut acc = vec![CompensatedC::default(); n];
            for t in trees {
                for (a, z) in acc.iter_mut().zip(ctx.tree_value(t)?) {
                    a.add(z);
                }
            }
            Ok(acc.iter().map(CompensatedC::value).collect())
        })?
    }

    /// `Σ |Val(θ)|` per component, the scale of the cancellations.
    pub fn tree_magnitude(&mut self, k: usize, nu: &Mode) -> Result<Vec<f64>, TreeError> {
        let n = self.spec.dim_n();
        self.with_trees(k, nu, |ctx, trees| {
            let mut acc = vec![0.0; n];
            for t in trees {
                for (a, z) in acc.iter_mut().zip(ctx.tree_value(t)?) {
                    *a += z.norm();
                }
            }
            Ok(acc)
        })?
    }

    /// Node factor of the root without its propagator.
    pub fn bare_value(&self, tree: &LabeledTree) -> Result<Vec<C64>, TreeError> {
        self.evaluate(tree, None, 0.0, Root::Bare)
    }

    /// `𝒱_T(x)` as an `n × n` matrix, column `j` obtained with the entering
    /// line set to `e_j`.
    pub fn self_energy_value(&self, graph: &LabeledTree, x: f64) -> Result<DMatrix<C64>, TreeError> {
        let n = self.spec.dim_n();
        let mut m = DMatrix::zeros(n, n);
        for j in 0..n {
            let mut e = vec![C64::new(0.0, 0.0); n];
            e[j] = C64::new(1.0, 0.0);
            let col = self.evaluate(graph, Some(&e), x, Root::Bare)?;
            for (r, z) in col.into_iter().enumerate() {
                m[(r, j)] = z;
            }
        }
        Ok(m)
    }

    /// `M^{(k)}(x) = Σ_T 𝒱_T(x)` over the self-energy graphs of order `k`.
    pub fn self_energy_sum(&mut self, k: usize, x: f64) -> Result<DMatrix<C64>, TreeError> {
        let n = self.spec.dim_n();
        let graphs = self.se_graphs_rc(k)?;
        let mut m = DMatrix::zeros(n, n);
        for g in &graphs {
            m += self.self_energy_value(g, x)?;
        }
        Ok(m)
    }

    /// `∂_x M^{(k)}` by a centred difference of step `h`.
    pub fn self_energy_derivative(&mut self, k: usize, x: f64, h: f64) -> Result<DMatrix<C64>, TreeError> {
        let a = self.self_energy_sum(k, x + h)?;
        let b = self.self_energy_sum(k, x - h)?;
        Ok((a - b) / C64::new(2.0 * h, 0.0))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifiedMode {
    pub nu: Mode,
    pub n_trees: usize,
    pub tree_sum: Vec<[f64; 2]>,
    pub recursion_value: Vec<[f64; 2]>,
    /// `‖tree sum − recursion‖ / ‖recursion‖`; a vanishing recursion value
    /// counts as agreement when the tree sum is at roundoff of `Σ|Val|`.
    pub rel_error: f64,
    /// Smallest Siegel-Bryuno margin over the trees of this mode.
    pub siegel_bryuno_worst_margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TreeVerification {
    #[serde(rename = "k")]
    pub order: usize,
    /// Diophantine data behind the Siegel-Bryuno margins.
    pub stamp: DiophantineStamp,
    pub modes: Vec<VerifiedMode>,
    pub worst_rel_error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Compare tree sums at order `k` with the recursion, mode by mode, over the
/// union of both supports.
pub fn verify_trees(ctx: &mut TreeContext, k: usize, tolerance: f64) -> Result<TreeVerification, TreeError> {
    verify_trees_with(ctx, k, tolerance, &SolveOptions::default())
}

/// [`verify_trees`] with explicit options for the recursion and its stamp.
pub fn verify_trees_with(
    ctx: &mut TreeContext,
    k: usize,
    tolerance: f64,
    opts: &SolveOptions,
) -> Result<TreeVerification, TreeError> {
    let rep = solve_lindstedt_with(&ctx.spec, &ctx.omega, k, opts)?;
    let gamma = rep.stamp.gamma;
    let tau = rep.stamp.tau;
    let mut modes: std::collections::BTreeSet<Mode> = ctx.momenta(k)?.into_iter().collect();
    modes.extend(rep.series.order(k).map(|(nu, _)| nu.clone()));
    let mut out = Vec::with_capacity(modes.len());
    let mut worst = 0.0_f64;
    for nu in modes {
        let sum = ctx.tree_sum(k, &nu)?;
        let mag = ctx.tree_magnitude(k, &nu)?;
        let rec = rep.series.coeff_or_zero(k, &nu);
        let diff: f64 = sum.iter().zip(&rec).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        let size: f64 = rec.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let scale: f64 = mag.iter().sum();
        let rel = if diff == 0.0 {
            0.0
        } else if size > 0.0 {
            diff / size
        } else if diff <= 64.0 * f64::EPSILON * scale {
            0.0
        } else {
            f64::INFINITY
        };
        worst = worst.max(rel);
        let margin = ctx.with_trees(k, &nu, |ctx, trees| {
            trees
                .iter()
                .map(|t| clusters::siegel_bryuno_check(t, &ctx.omega, gamma, tau).worst_margin)
                .fold(f64::INFINITY, f64::min)
        })?;
        out.push(VerifiedMode {
            n_trees: ctx.count(k, &nu)?,
            tree_sum: sum.iter().map(|z| [z.re, z.im]).collect(),
            recursion_value: rec.iter().map(|z| [z.re, z.im]).collect(),
            rel_error: rel,
            siegel_bryuno_worst_margin: margin,
            nu,
        });
    }
    Ok(TreeVerification {
        order: k,
        stamp: rep.stamp.clone(),
        modes: out,
        worst_rel_error: worst,
        tolerance,
        passed: worst <= tolerance,
    })
}
