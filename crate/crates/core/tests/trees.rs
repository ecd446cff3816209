use std::collections::BTreeSet;

use lindstedt::diophantine::{diophantine_constant, Component, QuadraticSurd, RotationVector};
use lindstedt::models::{FourierCoeff, LowerForcing, ModelSpec, Tolerances};
use lindstedt::series::Mode;
use lindstedt::trees::*;
use lindstedt::C64;

fn golden_rotation() -> RotationVector {
    RotationVector::rotation_number(Component::Surd(QuadraticSurd::golden())).unwrap()
}

fn cos_sum_torus() -> ModelSpec {
    ModelSpec::maximal_torus(vec![
        FourierCoeff::new(vec![1, 1], 0.5, 0.0),
        FourierCoeff::new(vec![-1, -1], 0.5, 0.0),
    ])
    .unwrap()
}

fn lower_torus() -> ModelSpec {
    let m = |a: i32, b: i32, c: f64| (Mode(vec![a]), Mode(vec![b]), C64::new(c, 0.0));
    let terms = vec![m(1, 0, 0.5), m(-1, 0, 0.5), m(0, 1, 0.5), m(0, -1, 0.5), m(1, -1, 0.25), m(-1, 1, 0.25)];
    ModelSpec::lower_tori(1, 1, vec![0.0], LowerForcing::Trig(terms), Tolerances::default()).unwrap()
}

fn cubic_dissipative() -> ModelSpec {
    ModelSpec::dissipative(
        1,
        vec![0.0, 0.0, 0.0, 1.0],
        None,
        vec![
            FourierCoeff::new(vec![0], 1.0, 0.0),
            FourierCoeff::new(vec![1], 0.5, 0.0),
            FourierCoeff::new(vec![-1], 0.5, 0.0),
        ],
        Tolerances::default(),
    )
    .unwrap()
}

fn golden_scalar_flow() -> RotationVector {
    RotationVector::from_floats(&[QuadraticSurd::golden().value()]).unwrap()
}

fn unit_flow() -> RotationVector {
    RotationVector::from_floats(&[1.0]).unwrap()
}

#[test]
fn tree_sums_match_recursion_on_every_model() {
    let cases: Vec<(ModelSpec, RotationVector, usize)> = vec![
        (ModelSpec::standard_map(None).unwrap(), golden_rotation(), 5),
        (cos_sum_torus(), RotationVector::golden_flow(), 5),
        (lower_torus(), golden_scalar_flow(), 4),
        (cubic_dissipative(), unit_flow(), 5),
    ];
    for (spec, w, kmax) in cases {
        let mut ctx = TreeContext::new(&spec, &w, kmax).unwrap();
        for k in 1..=kmax {
            let v = verify_trees(&mut ctx, k, 1e-10).unwrap();
            assert!(v.passed, "{:?} k={k}: {:e}", spec.kind(), v.worst_rel_error);
            assert!(v.modes.iter().all(|m| m.n_trees > 0));
        }
    }
}

#[test]
fn enumerated_trees_are_well_formed() {
    let mut ctx = TreeContext::new(&lower_torus(), &golden_scalar_flow(), 3).unwrap();
    for k in 1..=3 {
        for nu in ctx.momenta(k).unwrap() {
            for t in ctx.trees(k, &nu).unwrap() {
                assert_eq!(t.order(), k);
                assert_eq!(t.momentum(), &nu);
                assert!(t.conservation_holds());
                for n in t.nodes() {
                    if n.children.is_empty() {
                        assert!(!n.mode.is_zero(), "end node with ν_v = 0 in {t}");
                    }
                    if n.momentum.is_zero() && n.mode.is_zero() {
                        assert!(n.children.len() >= 2, "{t}");
                    }
                }
            }
        }
    }
}

#[test]
fn standard_map_parity_and_support() {
    // the sine forcing only reaches momenta of the parity of k, |ν| ≤ k
    let mut ctx = TreeContext::new(&ModelSpec::standard_map(None).unwrap(), &golden_rotation(), 5).unwrap();
    for k in 1..=5 {
        for nu in ctx.momenta(k).unwrap() {
            assert!(nu.0[0].unsigned_abs() as usize <= k);
            assert_eq!((nu.0[0] - k as i32).rem_euclid(2), 0);
        }
    }
}

#[test]
fn planar_shapes_are_catalan() {
    // with every node on (1,1) all line momenta stay nonzero, so every
    // planar shape occurs among the maximal-torus trees of order k
    let mut ctx = TreeContext::new(&cos_sum_torus(), &RotationVector::golden_flow(), 5).unwrap();
    for k in 1..=5 {
        let mut shapes = BTreeSet::new();
        for nu in ctx.momenta(k).unwrap() {
            for t in ctx.trees(k, &nu).unwrap() {
                assert_eq!(t.len(), k);
                shapes.insert(planar_shape(&t));
            }
        }
        assert_eq!(shapes.len() as u64, catalan(k - 1));
        assert!(shapes.len() <= 1 << (2 * k));
        assert_eq!(shapes, planar_shapes(k).into_iter().collect());
    }
}

#[test]
fn display_is_nested_labels() {
    let mut ctx = TreeContext::new(&cubic_dissipative(), &unit_flow(), 2).unwrap();
    let trees = ctx.trees(2, &Mode(vec![1])).unwrap();
    let text: BTreeSet<String> = trees.iter().map(|t| t.to_string()).collect();
    assert!(text.contains("(b1 ([1]))"), "{text:?}");
}

#[test]
fn order_budget_is_enforced() {
    let w = RotationVector::golden_flow();
    assert!(matches!(
        TreeContext::new(&cos_sum_torus(), &w, DEFAULT_ENUM_MAX + 1),
        Err(TreeError::OrderBudget { .. })
    ));
    let mut ctx = TreeContext::new(&cos_sum_torus(), &w, 2).unwrap();
    assert!(matches!(ctx.trees(3, &Mode(vec![1, 1])), Err(TreeError::OrderBudget { .. })));
    assert!(TreeContext::new(&cos_sum_torus(), &golden_rotation(), 2).is_err());
}

#[test]
fn siegel_bryuno_bound_on_standard_map_trees() {
    let w = golden_rotation();
    let stamp = diophantine_constant(&w, 1.0, 200).unwrap();
    let mut ctx = TreeContext::new(&ModelSpec::standard_map(None).unwrap(), &w, 5).unwrap();
    let mut checked = 0;
    for k in 1..=5 {
        for nu in ctx.momenta(k).unwrap() {
            for t in ctx.trees(k, &nu).unwrap() {
                let rep = siegel_bryuno_check(&t, &w, stamp.gamma, 1.0);
                assert!(rep.holds, "{t}: {rep:?}");
                assert_eq!(rep.c, 8.0);
                checked += 1;
            }
        }
    }
    assert!(checked > 300);
}

#[test]
fn clusters_partition_lines_by_scale() {
    let w = golden_rotation();
    let stamp = diophantine_constant(&w, 1.0, 200).unwrap();
    let mut ctx = TreeContext::new(&ModelSpec::standard_map(None).unwrap(), &w, 5).unwrap();
    for t in ctx.trees(5, &Mode(vec![1])).unwrap() {
        let rep = scale_decomposition(&t, &w, stamp.gamma);
        let lines: usize = rep.lines_on_scale.values().sum();
        assert_eq!(lines, t.len());
        for c in &rep.clusters {
            // every internal line sits on a scale ≤ n, every external one above
            assert!(c.internal_lines.iter().all(|&l| rep.line_scales[l] <= c.scale));
            assert!(c.entering.iter().all(|&l| rep.line_scales[l] > c.scale));
            if let Some(e) = c.exiting {
                if e != 0 {
                    assert!(rep.line_scales[e] > c.scale);
                }
            }
            if c.self_energy {
                assert!(cluster_momentum(&t, &c.nodes).is_zero());
            }
        }
    }
}

#[test]
fn first_order_self_energies() {
    let h = lower_torus().hessian().unwrap()[(0, 0)];
    let mut ctx = TreeContext::new(&lower_torus(), &golden_scalar_flow(), 2).unwrap();
    for x in [0.0, 0.3, -1.1] {
        let m = ctx.self_energy_sum(1, x).unwrap();
        let expect = [[0.0, 0.0], [0.0, -h]];
        for r in 0..2 {
            for c in 0..2 {
                assert_eq!(m[(r, c)], C64::new(expect[r][c], 0.0));
            }
        }
    }
    let spec = cubic_dissipative();
    let a = spec.damping_a().unwrap();
    let mut ctx = TreeContext::new(&spec, &unit_flow(), 2).unwrap();
    for x in [0.0, 0.3, 2.5] {
        let m = ctx.self_energy_sum(1, x).unwrap();
        assert!((m[(0, 0)] - C64::new(x * x - a, 0.0)).norm() <= 1e-15 * (x * x + a));
    }
}

#[test]
fn maximal_torus_self_energy_vanishes_to_second_order() {
    let mut ctx = TreeContext::new(&cos_sum_torus(), &RotationVector::golden_flow(), 4).unwrap();
    assert!(ctx.self_energy_graphs(1).unwrap().is_empty());
    assert!(!ctx.self_energy_graphs(2).unwrap().is_empty());
    let m0 = ctx.self_energy_sum(2, 0.0).unwrap();
    let d0 = ctx.self_energy_derivative(2, 0.0, 1e-4).unwrap();
    assert!(m0.norm() <= 1e-8 && d0.norm() <= 1e-8, "{m0} {d0}");
    // nonzero away from x = 0, and M(x) = M(−x)ᵀ
    let m = ctx.self_energy_sum(2, 0.2).unwrap();
    assert!(m.norm() > 1e-3);
    for k in 1..=2 {
        for x in [0.1, 0.37] {
            let a = ctx.self_energy_sum(k, x).unwrap();
            let b = ctx.self_energy_sum(k, -x).unwrap();
            assert!((a - b.transpose()).norm() <= 1e-12);
        }
    }
}

#[test]
fn self_energy_graphs_have_a_single_entry() {
    let mut ctx = TreeContext::new(&cubic_dissipative(), &unit_flow(), 3).unwrap();
    for k in 1..=3 {
        for g in ctx.self_energy_graphs(k).unwrap() {
            assert_eq!(g.order(), k);
            assert!(g.momentum().is_zero());
            let stubs = g.nodes().iter().filter(|n| n.kind == NodeKind::Stub).count();
            assert_eq!(stubs, 1, "{g}");
        }
    }
}

#[test]
fn rerooting_classes_cancel() {
    let mut ctx = TreeContext::new(&cos_sum_torus(), &RotationVector::golden_flow(), 4).unwrap();
    let mut groups_seen = 0;
    for k in 2..=4 {
        let trees = ctx.compatibility_trees(k).unwrap();
        let groups = group_by_rerooting(&ctx, &trees).unwrap();
        let members: usize = groups.iter().map(|g| g.members).sum();
        assert_eq!(members, trees.len());
        for g in &groups {
            assert!(g.magnitude > 0.0);
            assert!(g.relative <= 1e-12, "{g:?}");
        }
        groups_seen += groups.len();
    }
    assert!(groups_seen >= 4);
}

#[test]
fn badge_chain_closed_form() {
    let ctx = TreeContext::new(&cubic_dissipative(), &unit_flow(), 1).unwrap();
    for k in 1..=9 {
        for nu in [1, -1] {
            let c = factorial_chain_tree(&ctx, k, &Mode(vec![nu])).unwrap();
            assert_eq!(c.tree.order(), k);
            assert_eq!(c.tree.len(), k);
            let (v, e) = (C64::new(c.value[0], c.value[1]), C64::new(c.closed_form[0], c.closed_form[1]));
            assert!((v - e).norm() <= 1e-14 * e.norm(), "k={k}: {v} vs {e}");
        }
    }
    // every badge is a one-node self-energy cluster
    let c = factorial_chain_tree(&ctx, 6, &Mode(vec![1])).unwrap();
    let rep = scale_decomposition(&c.tree, &unit_flow(), 0.5);
    assert_eq!(rep.single_node_self_energy.len(), 5);
    assert_eq!(rep.non_resonant.values().sum::<usize>(), 1);
}

#[test]
fn badge_chain_grows_factorially() {
    let fit = fit_chain_growth(0.5, 20, &[4, 5, 6, 7, 8, 9, 10]).unwrap();
    assert!(fit.coeffs[2] > 0.0, "{fit:?}");
    assert!(fit.r_squared >= 0.95, "{fit:?}");
    assert!(fit.nus.windows(2).all(|w| w[0] < w[1]));
}
