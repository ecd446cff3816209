use std::collections::BTreeMap;

use num_complex::Complex64 as C64;
use serde::Serialize;

use super::enumerate::TreeContext;
use super::{LabeledTree, NodeKind, TreeError};
use crate::numeric::CompensatedC;

fn label(tree: &LabeledTree, v: usize) -> String {
    let n = &tree.nodes()[v];
    match n.kind {
        NodeKind::Forcing => format!("{:?}", n.mode.0),
        NodeKind::Badge { p } => format!("b{p}"),
        NodeKind::Stub => "*".into(),
    }
}

fn adjacency(tree: &LabeledTree) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); tree.len()];
    for (v, n) in tree.nodes().iter().enumerate() {
        if let Some(p) = n.parent {
            adj[v].push(p);
            adj[p].push(v);
        }
    }
    adj
}

fn rooted_form(tree: &LabeledTree, adj: &[Vec<usize>], v: usize, from: Option<usize>) -> String {
    let mut kids: Vec<String> = adj[v]
        .iter()
        .filter(|&&w| Some(w) != from)
        .map(|&w| rooted_form(tree, adj, w, Some(v)))
        .collect();
    kids.sort();
    format!("({}{})", label(tree, v), kids.concat())
}

/// Canonical string of the underlying unrooted, unordered labelled tree:
/// the smaller rooted form over the one or two centres.
pub fn unrooted_canonical(tree: &LabeledTree) -> String {
    let adj = adjacency(tree);
    let n = tree.len();
    let mut degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut alive = n;
    let mut removed = vec![false; n];
    let mut layer: Vec<usize> = (0..n).filter(|&v| degree[v] <= 1).collect();
    while alive > 2 {
        let mut next = Vec::new();
        for &v in &layer {
            removed[v] = true;
            alive -= 1;
            for &w in &adj[v] {
                if !removed[w] {
                    degree[w] -= 1;
                    if degree[w] == 1 {
                        next.push(w);
                    }
                }
            }
        }
        layer = next;
    }
    (0..n)
        .filter(|&v| !removed[v])
        .map(|c| rooted_form(tree, &adj, c, None))
        .min()
        .unwrap_or_default()
}

/// Planar shape of a tree: labels dropped, child order kept.
pub fn planar_shape(tree: &LabeledTree) -> String {
    fn rec(t: &LabeledTree, v: usize, out: &mut String) {
        out.push('(');
        for &c in &t.nodes()[v].children {
            rec(t, c, out);
        }
        out.push(')');
    }
    let mut s = String::new();
    rec(tree, 0, &mut s);
    s
}

/// All planar rooted shapes with `k` nodes.
pub fn planar_shapes(k: usize) -> Vec<String> {
    fn forests(k: usize, memo: &mut BTreeMap<usize, Vec<String>>) -> Vec<String> {
        if let Some(v) = memo.get(&k) {
            return v.clone();
        }
        let mut out = Vec::new();
        if k == 0 {
            out.push(String::new());
        } else {
            // first tree takes j nodes, the rest of the forest k − j
            for j in 1..=k {
                for first in forests(j - 1, memo) {
                    for rest in forests(k - j, memo) {
                        out.push(format!("({first}){rest}"));
                    }
                }
            }
        }
        memo.insert(k, out.clone());
        out
    }
    if k == 0 {
        return Vec::new();
    }
    let mut memo = BTreeMap::new();
    forests(k - 1, &mut memo)
        .into_iter()
        .map(|f| format!("({f})"))
        .collect()
}

/// `C_n = (2n)! / (n! (n+1)!)`.
pub fn catalan(n: usize) -> u64 {
    let mut c: u64 = 1;
    for i in 0..n as u64 {
        c = c * 2 * (2 * i + 1) / (i + 2);
    }
    c
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RerootGroup {
    pub key: String,
    pub members: usize,
    pub sum: Vec<[f64; 2]>,
    /// `Σ |value|` over the members.
    pub magnitude: f64,
    /// `|sum| / magnitude`.
    pub relative: f64,
}

/// Root-node values of the given trees, summed within classes of equal
/// unrooted canonical form.
pub fn group_by_rerooting(ctx: &TreeContext, trees: &[LabeledTree]) -> Result<Vec<RerootGroup>, TreeError> {
    let n = ctx.spec().dim_n();
    let mut groups: BTreeMap<String, (usize, Vec<CompensatedC>, f64)> = BTreeMap::new();
    for t in trees {
        let v = ctx.bare_value(t)?;
        let e = groups
            .entry(unrooted_canonical(t))
            .or_insert_with(|| (0, vec![CompensatedC::default(); n], 0.0));
        e.0 += 1;
        for (a, z) in e.1.iter_mut().zip(&v) {
            a.add(*z);
        }
        e.2 += v.iter().map(|z| z.norm()).sum::<f64>();
    }
    Ok(groups
        .into_iter()
        .map(|(key, (members, acc, mag))| {
            let sum: Vec<C64> = acc.iter().map(CompensatedC::value).collect();
            let size: f64 = sum.iter().map(|z| z.norm()).sum();
            RerootGroup {
                key,
                members,
                sum: sum.iter().map(|z| [z.re, z.im]).collect(),
                magnitude: mag,
                relative: if mag > 0.0 { size / mag } else { 0.0 },
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::Mode;

    #[test]
    fn catalan_numbers() {
        let c: Vec<u64> = (0..8).map(catalan).collect();
        assert_eq!(c, vec![1, 1, 2, 5, 14, 42, 132, 429]);
        for k in 1..=7 {
            assert_eq!(planar_shapes(k).len() as u64, catalan(k - 1));
        }
    }

    #[test]
    fn rerooting_invariance() {
        let leaf = |m: i32| LabeledTree::leaf(NodeKind::Forcing, Mode(vec![m]), 1, Mode(vec![m]));
        // a path a-b-c rooted at a and at c
        let ab = LabeledTree::join(NodeKind::Forcing, Mode(vec![2]), 1, Mode(vec![3]), &[&leaf(1)]);
        let t1 = LabeledTree::join(NodeKind::Forcing, Mode(vec![5]), 1, Mode(vec![8]), &[&ab]);
        let cb = LabeledTree::join(NodeKind::Forcing, Mode(vec![2]), 1, Mode(vec![7]), &[&leaf(5)]);
        let t2 = LabeledTree::join(NodeKind::Forcing, Mode(vec![1]), 1, Mode(vec![8]), &[&cb]);
        // rooted at the middle with the children swapped
        let t3 = LabeledTree::join(NodeKind::Forcing, Mode(vec![2]), 1, Mode(vec![8]), &[&leaf(5), &leaf(1)]);
        let k = unrooted_canonical(&t1);
        assert_eq!(k, unrooted_canonical(&t2));
        assert_eq!(k, unrooted_canonical(&t3));
        let other = LabeledTree::join(NodeKind::Forcing, Mode(vec![1]), 1, Mode(vec![8]), &[&ab]);
        assert_ne!(k, unrooted_canonical(&other));
    }
}
