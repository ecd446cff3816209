use std::collections::BTreeMap;
use std::rc::Rc;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::{LabeledTree, NodeKind, TreeError};
use crate::diophantine::RotationVector;
use crate::models::{ModelKind, ModelSpec};
use crate::numeric::factorial;
use crate::series::{ForcingModes, Mode};

/// Highest order enumerated unless the context is built with a larger
/// budget.
pub const DEFAULT_ENUM_MAX: usize = 6;

const COUNT_LIMIT: usize = 4_000_000;

/// Symmetric tensor of one mode at one degree: pairs
/// `(σ, c_{m(σ)} Π m_j! / s!)` over ordered index tuples with a nonzero
/// coefficient.
pub(crate) type Tensor = Vec<(Vec<usize>, Vec<C64>)>;

type Table = BTreeMap<Mode, Vec<Rc<LabeledTree>>>;

/// Model, frequency vector and memoised tree tables up to a maximum order.
pub struct TreeContext {
    pub(crate) spec: ModelSpec,
    pub(crate) omega: RotationVector,
    pub(crate) g: Option<DMatrix<f64>>,
    max_order: usize,
    modes: Vec<Mode>,
    /// `tensors[mode index][s]`.
    pub(crate) tensors: Vec<Vec<Tensor>>,
    mode_index: BTreeMap<Mode, usize>,
    tables: Vec<Table>,
    se_partial: Vec<Table>,
    se_top: Vec<Vec<Rc<LabeledTree>>>,
    count: usize,
}

fn tensor(poly: &crate::series::MultiPoly, s: usize) -> Tensor {
    let n = poly.nvars();
    if !poly.has_degree(s) {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut sigma = vec![0usize; s];
    loop {
        let mut m = vec![0u32; n];
        for &i in &sigma {
            m[i] += 1;
        }
        if let Some(c) = poly.coeff(&m) {
            let w = m.iter().map(|&e| factorial(e as usize)).product::<f64>() / factorial(s);
            out.push((sigma.clone(), c.iter().map(|z| z * w).collect()));
        }
        // odometer over [n]^s
        let mut j = 0;
        loop {
            if j == s {
                return out;
            }
            sigma[j] += 1;
            if sigma[j] < n {
                break;
            }
            sigma[j] = 0;
            j += 1;
        }
    }
}

/// Compositions of `total` into `parts` positive integers.
pub(crate) fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    fn rec(left: usize, parts: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts == 0 {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        if left < parts {
            return;
        }
        for first in 1..=left - (parts - 1) {
            cur.push(first);
            rec(left - first, parts - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(total, parts, &mut Vec::new(), &mut out);
    out
}

impl TreeContext {
    pub fn new(spec: &ModelSpec, omega: &RotationVector, max_order: usize) -> Result<Self, TreeError> {
        Self::with_budget(spec, omega, max_order, DEFAULT_ENUM_MAX)
    }

    pub fn with_budget(
        spec: &ModelSpec,
        omega: &RotationVector,
        max_order: usize,
        budget: usize,
    ) -> Result<Self, TreeError> {
        if max_order == 0 {
            return Err(TreeError::Invalid("tree order must be at least 1".into()));
        }
        if max_order > budget {
            return Err(TreeError::OrderBudget { order: max_order, max: budget });
        }
        if (spec.kind() == ModelKind::StandardMap) != omega.is_mod_one() || omega.dim() != spec.dim_d() {
            return Err(TreeError::Invalid(
                "rotation vector does not match the model (dimension or map/flow type)".into(),
            ));
        }
        let forcing: ForcingModes = spec.forcing_modes(max_order)?;
        let mut modes = Vec::new();
        let mut tensors = Vec::new();
        let mut mode_index = BTreeMap::new();
        for t in forcing.terms() {
            mode_index.insert(t.mode.clone(), modes.len());
            modes.push(t.mode.clone());
            tensors.push((0..=max_order).map(|s| tensor(&t.poly, s)).collect());
        }
        Ok(TreeContext {
            spec: spec.clone(),
            omega: omega.clone(),
            g: spec.g_matrix(),
            max_order,
            modes,
            tensors,
            mode_index,
            tables: vec![Table::new()],
            se_partial: vec![Table::new()],
            se_top: vec![Vec::new()],
            count: 0,
        })
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn omega(&self) -> &RotationVector {
        &self.omega
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub(crate) fn tensor_of(&self, mode: &Mode, s: usize) -> &[(Vec<usize>, Vec<C64>)] {
        match self.mode_index.get(mode) {
            Some(&i) => self.tensors[i].get(s).map(|t| t.as_slice()).unwrap_or(&[]),
            None => &[],
        }
    }

    fn degrees(&self, mode_idx: usize, max_s: usize) -> Vec<usize> {
        (0..=max_s.min(self.max_order))
            .filter(|&s| !self.tensors[mode_idx][s].is_empty())
            .collect()
    }

    fn check_order(&self, k: usize) -> Result<(), TreeError> {
        if k > self.max_order {
            return Err(TreeError::OrderBudget { order: k, max: self.max_order });
        }
        Ok(())
    }

    fn bump(&mut self, n: usize) -> Result<(), TreeError> {
        self.count += n;
        if self.count > COUNT_LIMIT {
            return Err(TreeError::CountBudget { limit: COUNT_LIMIT });
        }
        Ok(())
    }

    /// Ordered tuples of trees with the given orders, flattened over all
    /// momenta.
    fn tuples(&self, orders: &[usize]) -> Vec<Vec<Rc<LabeledTree>>> {
        let mut acc: Vec<Vec<Rc<LabeledTree>>> = vec![Vec::new()];
        for &k in orders {
            let pool: Vec<&Rc<LabeledTree>> = self.tables[k].values().flatten().collect();
            let mut next = Vec::with_capacity(acc.len() * pool.len());
            for a in &acc {
                for t in &pool {
                    let mut b = a.clone();
                    b.push(Rc::clone(t));
                    next.push(b);
                }
            }
            acc = next;
        }
        acc
    }

    fn ensure(&mut self, k: usize) -> Result<(), TreeError> {
        self.check_order(k)?;
        while self.tables.len() <= k {
            let k = self.tables.len();
            self.build(k)?;
        }
        Ok(())
    }

    fn build(&mut self, k: usize) -> Result<(), TreeError> {
        let d = self.spec.dim_d();
        let zero = Mode::zero(d);
        let mut table = Table::new();
        let mut added = 0;
        // Forcing node with a nonzero line: children carry order k − 1.
        for (mi, mode) in self.modes.iter().enumerate() {
            for s in self.degrees(mi, k - 1) {
                if s == 0 && k != 1 {
                    continue;
                }
                for comp in compositions(k - 1, s) {
                    for tuple in self.tuples(&comp) {
                        let mut mom = mode.clone();
                        for t in &tuple {
                            mom = mom.add(t.momentum());
                        }
                        if mom.is_zero() {
                            continue;
                        }
                        let refs: Vec<&LabeledTree> = tuple.iter().map(|t| t.as_ref()).collect();
                        let tree = LabeledTree::join(NodeKind::Forcing, mode.clone(), 1, mom.clone(), &refs);
                        table.entry(mom).or_default().push(Rc::new(tree));
                        added += 1;
                    }
                }
            }
        }
        // Badges.
        for p in 1..=self.spec.k0().min(k - 1) {
            for (mom, trees) in &self.tables[k - p] {
                if mom.is_zero() {
                    continue;
                }
                for t in trees {
                    let tree = LabeledTree::join(NodeKind::Badge { p }, zero.clone(), p, mom.clone(), &[t]);
                    table.entry(mom.clone()).or_default().push(Rc::new(tree));
                    added += 1;
                }
            }
        }
        self.tables.push(table);
        // Zero-momentum lines: the node adds no order, children carry k.
        if self.g.is_some() {
            let mut zeros = Vec::new();
            for (mi, mode) in self.modes.iter().enumerate() {
                let min_s = if mode.is_zero() { 2 } else { 1 };
                for s in self.degrees(mi, k) {
                    if s < min_s {
                        continue;
                    }
                    for comp in compositions(k, s) {
                        for tuple in self.tuples(&comp) {
                            let mut mom = mode.clone();
                            for t in &tuple {
                                mom = mom.add(t.momentum());
                            }
                            if !mom.is_zero() {
                                continue;
                            }
                            let refs: Vec<&LabeledTree> = tuple.iter().map(|t| t.as_ref()).collect();
                            zeros.push(Rc::new(LabeledTree::join(
                                NodeKind::Forcing,
                                mode.clone(),
                                0,
                                zero.clone(),
                                &refs,
                            )));
                        }
                    }
                }
            }
            if !zeros.is_empty() {
                added += zeros.len();
                self.tables[k].insert(zero, zeros);
            }
        }
        self.bump(added)
    }

    /// All trees of order `k` whose root line carries `ν`.
    pub fn trees(&mut self, k: usize, nu: &Mode) -> Result<Vec<LabeledTree>, TreeError> {
        self.ensure(k)?;
        Ok(self.tables[k]
            .get(nu)
            .map(|v| v.iter().map(|t| t.as_ref().clone()).collect())
            .unwrap_or_default())
    }

    /// Root momenta reached at order `k`.
    pub fn momenta(&mut self, k: usize) -> Result<Vec<Mode>, TreeError> {
        self.ensure(k)?;
        Ok(self.tables[k].keys().cloned().collect())
    }

    pub fn count(&mut self, k: usize, nu: &Mode) -> Result<usize, TreeError> {
        self.ensure(k)?;
        Ok(self.tables[k].get(nu).map_or(0, Vec::len))
    }

    pub(crate) fn with_trees<R>(
        &mut self,
        k: usize,
        nu: &Mode,
        f: impl FnOnce(&Self, &[Rc<LabeledTree>]) -> R,
    ) -> Result<R, TreeError> {
        self.ensure(k)?;
        let trees = self.tables[k].get(nu).cloned().unwrap_or_default();
        Ok(f(self, &trees))
    }

    /// Trees contributing to `[F]^{(k−1)}_0`: a forcing root with zero
    /// momentum whose children carry order `k − 1`, counted with `k_v = 1`.
    pub fn compatibility_trees(&mut self, k: usize) -> Result<Vec<LabeledTree>, TreeError> {
        if k < 2 {
            return Err(TreeError::Invalid("compatibility trees start at order 2".into()));
        }
        self.ensure(k - 1)?;
        let zero = Mode::zero(self.spec.dim_d());
        let mut out = Vec::new();
        for (mi, mode) in self.modes.iter().enumerate() {
            for s in self.degrees(mi, k - 1) {
                if s == 0 {
                    continue;
                }
                for comp in compositions(k - 1, s) {
                    for tuple in self.tuples(&comp) {
                        let mut mom = mode.clone();
                        for t in &tuple {
                            mom = mom.add(t.momentum());
                        }
                        if mom.is_zero() {
                            let refs: Vec<&LabeledTree> = tuple.iter().map(|t| t.as_ref()).collect();
                            out.push(LabeledTree::join(NodeKind::Forcing, mode.clone(), 1, zero.clone(), &refs));
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    fn ensure_se(&mut self, k: usize) -> Result<(), TreeError> {
        self.check_order(k)?;
        while self.se_partial.len() <= k {
            let k = self.se_partial.len();
            self.ensure(k.saturating_sub(1).max(1).min(self.max_order))?;
            self.build_se(k)?;
        }
        Ok(())
    }

    /// Path-carrying graphs of order `k`: the stub sits at the bottom of the
    /// path, every path line except the top one carries a nonzero `ν⁰`.
    fn build_se(&mut self, k: usize) -> Result<(), TreeError> {
        let d = self.spec.dim_d();
        let zero = Mode::zero(d);
        let stub = Rc::new(LabeledTree::leaf(NodeKind::Stub, zero.clone(), 0, zero.clone()));
        let mut partial = Table::new();
        let mut top = Vec::new();
        let mut added = 0;
        let place = |tree: LabeledTree, partial: &mut Table, top: &mut Vec<Rc<LabeledTree>>| {
            let m = tree.momentum().clone();
            if m.is_zero() {
                top.push(Rc::new(tree));
            } else {
                partial.entry(m).or_default().push(Rc::new(tree));
            }
        };
        for (mi, mode) in self.modes.iter().enumerate() {
            for s in self.degrees(mi, k) {
                if s == 0 {
                    continue;
                }
                for k_path in 0..k {
                    let paths: Vec<Rc<LabeledTree>> = if k_path == 0 {
                        vec![Rc::clone(&stub)]
                    } else {
                        self.se_partial[k_path].values().flatten().cloned().collect()
                    };
                    if paths.is_empty() {
                        continue;
                    }
                    let rest = k - 1 - k_path;
                    let comps = if s == 1 {
                        if rest == 0 {
                            vec![Vec::new()]
                        } else {
                            Vec::new()
                        }
                    } else {
                        compositions(rest, s - 1)
                    };
                    for comp in comps {
                        let others = self.tuples(&comp);
                        for pos in 0..s {
                            for path in &paths {
                                for tuple in &others {
                                    let mut mom = mode.add(path.momentum());
                                    for t in tuple {
                                        mom = mom.add(t.momentum());
                                    }
                                    let mut refs: Vec<&LabeledTree> = tuple.iter().map(|t| t.as_ref()).collect();
                                    refs.insert(pos, path.as_ref());
                                    let tree = LabeledTree::join(NodeKind::Forcing, mode.clone(), 1, mom, &refs);
                                    place(tree, &mut partial, &mut top);
                                    added += 1;
                                }
                            }
                        }
                    }
                }
            }
        }
        for p in 1..=self.spec.k0().min(k) {
            let paths: Vec<Rc<LabeledTree>> = if p == k {
                vec![Rc::clone(&stub)]
            } else {
                self.se_partial[k - p].values().flatten().cloned().collect()
            };
            for path in paths {
                let tree = LabeledTree::join(NodeKind::Badge { p }, zero.clone(), p, path.momentum().clone(), &[&path]);
                place(tree, &mut partial, &mut top);
                added += 1;
            }
        }
        self.se_partial.push(partial);
        self.se_top.push(top);
        self.bump(added)
    }

    /// Self-energy graphs of order `k`: one entering line (the stub), equal
    /// entering and exiting momenta, internal path lines with `ν⁰ ≠ 0`.
    pub fn self_energy_graphs(&mut self, k: usize) -> Result<Vec<LabeledTree>, TreeError> {
        self.ensure_se(k)?;
        Ok(self.se_top[k].iter().map(|t| t.as_ref().clone()).collect())
    }

    pub(crate) fn se_graphs_rc(&mut self, k: usize) -> Result<Vec<Rc<LabeledTree>>, TreeError> {
        self.ensure_se(k)?;
        Ok(self.se_top[k].clone())
    }
}
