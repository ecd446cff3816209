use num_complex::Complex64 as C64;
use serde::Serialize;

use super::enumerate::TreeContext;
use super::{LabeledTree, NodeKind, TreeError};
use crate::diophantine::RotationVector;
use crate::models::{FourierCoeff, ModelKind, ModelSpec, Tolerances};
use crate::numeric::{least_squares, ln_factorial};
use crate::series::Mode;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChainTree {
    #[serde(skip)]
    pub tree: LabeledTree,
    pub order: usize,
    pub nu: Mode,
    /// Value from the tree evaluator.
    pub value: [f64; 2],
    /// `(−1)^{k−1} (iω·ν)^{k−2} f_ν`.
    pub closed_form: [f64; 2],
}

/// `k − 1` badges `p = 1` stacked on a single end node of mode `ν`: every
/// line carries `ν`, every badge is a one-node self-energy cluster.
pub fn factorial_chain_tree(ctx: &TreeContext, k: usize, nu: &Mode) -> Result<ChainTree, TreeError> {
    if ctx.spec().kind() != ModelKind::Dissipative {
        return Err(TreeError::Invalid("the badge chain needs the dissipative model".into()));
    }
    if k < 1 || nu.is_zero() {
        return Err(TreeError::Invalid("chain needs k ≥ 1 and ν ≠ 0".into()));
    }
    let f_nu = ctx
        .tensor_of(nu, 0)
        .first()
        .map(|(_, c)| c[0])
        .ok_or_else(|| TreeError::Invalid(format!("no forcing mode {nu}")))?;
    let d = nu.dim();
    let mut tree = LabeledTree::leaf(NodeKind::Forcing, nu.clone(), 1, nu.clone());
    for _ in 1..k {
        tree = LabeledTree::join(NodeKind::Badge { p: 1 }, Mode::zero(d), 1, nu.clone(), &[&tree]);
    }
    let value = ctx.tree_value(&tree)?[0];
    let x = ctx.omega().dot(nu);
    let sign = if (k - 1).is_multiple_of(2) { 1.0 } else { -1.0 };
    let closed = C64::new(0.0, x).powi(k as i32 - 2) * f_nu * sign;
    Ok(ChainTree {
        tree,
        order: k,
        nu: nu.clone(),
        value: [value.re, value.im],
        closed_form: [closed.re, closed.im],
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChainFit {
    pub xi: f64,
    pub n_modes: i32,
    pub orders: Vec<usize>,
    /// Mode maximising `|Val|` at each order.
    pub nus: Vec<i32>,
    pub log_values: Vec<f64>,
    /// `(a₀, a₁, a₂)` in `log|Val| ≈ a₀ + a₁ k + a₂ log k!`.
    pub coeffs: [f64; 3],
    pub r_squared: f64,
}

/// Growth of the badge chain for `ẍ + ε^{−1}ẋ + x³ = 1 + Σ_{1≤|ν|≤N} e^{−ξ|ν|} e^{iνt}`,
/// `ω = 1`: at each order the mode with the largest chain value is kept and
/// `log|Val|` is fitted against `1, k, log k!`.
pub fn fit_chain_growth(xi: f64, n_modes: i32, orders: &[usize]) -> Result<ChainFit, TreeError> {
    if !(xi > 0.0) || n_modes < 1 || orders.len() < 4 {
        return Err(TreeError::Invalid("chain fit needs ξ > 0, N ≥ 1 and at least four orders".into()));
    }
    let mut f = vec![FourierCoeff::new(vec![0], 1.0, 0.0)];
    for n in 1..=n_modes {
        let c = (-xi * n as f64).exp();
        f.push(FourierCoeff::new(vec![n], c, 0.0));
        f.push(FourierCoeff::new(vec![-n], c, 0.0));
    }
    let spec = ModelSpec::dissipative(1, vec![0.0, 0.0, 0.0, 1.0], None, f, Tolerances::default())?;
    let omega = RotationVector::from_floats(&[1.0]).map_err(crate::models::ModelError::from)?;
    let ctx = TreeContext::new(&spec, &omega, 1)?;
    let mut nus = Vec::with_capacity(orders.len());
    let mut logs = Vec::with_capacity(orders.len());
    let mut rows = Vec::with_capacity(orders.len());
    for &k in orders {
        let best = (1..=n_modes)
            .max_by(|&a, &b| {
                let la = (k as f64 - 2.0) * (a as f64).ln() - xi * a as f64;
                let lb = (k as f64 - 2.0) * (b as f64).ln() - xi * b as f64;
                la.total_cmp(&lb)
            })
            .unwrap_or(1);
        let chain = factorial_chain_tree(&ctx, k, &Mode(vec![best]))?;
        let v = C64::new(chain.value[0], chain.value[1]).norm();
        nus.push(best);
        logs.push(v.ln());
        rows.push(vec![1.0, k as f64, ln_factorial(k)]);
    }
    let (b, r2) = least_squares(&rows, &logs)
        .ok_or_else(|| TreeError::Invalid("chain fit is rank deficient".into()))?;
    Ok(ChainFit {
        xi,
        n_modes,
        orders: orders.to_vec(),
        nus,
        log_values: logs,
        coeffs: [b[0], b[1], b[2]],
        r_squared: r2,
    })
}
