use lindstedt::diophantine::{Component, DiophantineError, QuadraticSurd, RotationVector};
use lindstedt::models::{
    compatibility_report, default_grid, residual_eval, residual_order_check, solve_lindstedt,
    solve_lindstedt_with, stationary_point_check, Extremum, FourierCoeff, LowerForcing, ModelDocument,
    ModelError, ModelKind, ModelSpec, SolveOptions, Tolerances,
};
use lindstedt::series::{Mode, MultiPoly};
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

/// `f = cos α + cos β₁ + ½cos(α − β₁)`-type lower torus, `r = s = 1`.
fn lower_torus() -> ModelSpec {
    let m = |a: i32, b: i32, c: f64| (Mode(vec![a]), Mode(vec![b]), C64::new(c, 0.0));
    let terms = vec![
        m(1, 0, 0.5),
        m(-1, 0, 0.5),
        m(0, 1, 0.5),
        m(0, -1, 0.5),
        m(1, -1, 0.25),
        m(-1, 1, 0.25),
    ];
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

#[test]
fn standard_map_first_order() {
    let w = golden_rotation();
    let rep = solve_lindstedt(&ModelSpec::standard_map(None).unwrap(), &w, 1).unwrap();
    let sm = ModelSpec::standard_map(None).unwrap();
    for nu in [1, -1] {
        let d0 = sm.delta(0, w.values()[0] * nu as f64);
        let expect = C64::new(0.0, -(nu as f64)) / (d0 * 2.0);
        let got = rep.series.coeff(1, &Mode(vec![nu])).unwrap()[0];
        assert!((got - expect).norm() <= 1e-15 * expect.norm());
    }
    assert_eq!(rep.series.order(1).count(), 2);
}

#[test]
fn maximal_torus_first_order() {
    let w = RotationVector::golden_flow();
    let rep = solve_lindstedt(&cos_sum_torus(), &w, 1).unwrap();
    assert_eq!(rep.series.order(1).count(), 2);
    for s in [1, -1] {
        let nu = Mode(vec![s, s]);
        let x = w.dot(&nu);
        let expect = C64::new(0.0, s as f64) * 0.5 / (x * x);
        let got = rep.series.coeff(1, &nu).unwrap();
        assert!((got[0] - expect).norm() < 1e-15);
        assert!((got[1] - expect).norm() < 1e-15);
    }
}

#[test]
fn dissipative_first_order() {
    let w = RotationVector::from_floats(&[1.0]).unwrap();
    let rep = solve_lindstedt(&cubic_dissipative(), &w, 1).unwrap();
    for s in [1, -1] {
        let got = rep.series.coeff(1, &Mode(vec![s])).unwrap()[0];
        let expect = C64::new(0.5, 0.0) / C64::new(0.0, s as f64);
        assert!((got - expect).norm() < 1e-15);
    }
}

fn all_models() -> Vec<(ModelSpec, RotationVector)> {
    vec![
        (ModelSpec::standard_map(None).unwrap(), golden_rotation()),
        (cos_sum_torus(), RotationVector::golden_flow()),
        (lower_torus(), RotationVector::from_floats(&[QuadraticSurd::golden().value()]).unwrap()),
        (cubic_dissipative(), RotationVector::from_floats(&[1.0]).unwrap()),
    ]
}

#[test]
fn residual_scales_as_eps_to_k_plus_one() {
    for (spec, w) in all_models() {
        for (k, e1, e2) in [(1, 0.02, 0.01), (3, 0.02, 0.01), (6, 0.04, 0.02)] {
            let rep = solve_lindstedt(&spec, &w, k).unwrap();
            let c = residual_order_check(&spec, &w, &rep.series, e1, e2).unwrap();
            assert!(c.contract_met, "{:?} K={k}: p = {}", spec.kind(), c.p);
            assert!(c.p >= k as f64 + 0.8);
            assert!(c.residual[1] < c.residual[0]);
        }
    }
}

#[test]
fn residual_check_reports_the_roundoff_floor() {
    let w = golden_rotation();
    let spec = ModelSpec::standard_map(None).unwrap();
    let rep = solve_lindstedt(&spec, &w, 6).unwrap();
    let err = residual_order_check(&spec, &w, &rep.series, 0.002, 0.001).unwrap_err();
    assert!(matches!(err, ModelError::RoundoffFloor { .. }));
    assert!(residual_order_check(&spec, &w, &rep.series, 0.01, 0.02).is_err());
}

#[test]
fn residual_of_the_zero_series_is_the_forcing() {
    // u = 0: the defect is ε max|F(0, ψ)| = ε max|sin| on the grid
    let w = golden_rotation();
    let spec = ModelSpec::standard_map(None).unwrap();
    let zero = lindstedt::series::FTSeries::zero(1, 1, 1);
    let r = residual_eval(&spec, &w, &zero, 0.1, &default_grid(1));
    assert!((r - 0.1).abs() < 1e-12, "{r}");
}

#[test]
fn compatibility_holds_through_order_five() {
    for (spec, w) in all_models() {
        let rep = solve_lindstedt(&spec, &w, 5).unwrap();
        let c = &rep.compatibility;
        assert!(c.worst_relative <= 1e-12, "{:?}: {c:?}", spec.kind());
        assert_eq!(c.entries.len(), 6);
        if matches!(spec.kind(), ModelKind::MaximalTorus | ModelKind::StandardMap) {
            assert!(c.entries[0].value.iter().all(|v| v == &[0.0, 0.0]));
            assert!(c.entries.iter().all(|e| e.imposed.iter().all(|&b| !b)));
        }
        let again = compatibility_report(&spec, &rep.series).unwrap();
        assert_eq!(&again, c);
    }
}

#[test]
fn lower_tori_impose_only_the_beta_components() {
    let w = RotationVector::from_floats(&[QuadraticSurd::golden().value()]).unwrap();
    let rep = solve_lindstedt(&lower_torus(), &w, 4).unwrap();
    for e in &rep.compatibility.entries {
        assert_eq!(e.imposed, vec![false, true]);
    }
    assert_eq!(rep.zero_mode_corrections.len(), 4);
}

#[test]
fn standard_map_series_is_odd() {
    let rep = solve_lindstedt(&ModelSpec::standard_map(None).unwrap(), &golden_rotation(), 8).unwrap();
    for (k, nu, v) in rep.series.iter() {
        let z = v[0];
        assert!(z.re.abs() <= 1e-15 * z.norm(), "k={k} ν={nu}: {z}");
        let m = rep.series.coeff(k, &nu.neg()).unwrap()[0];
        assert!((m + z).norm() <= 1e-15 * z.norm());
        // same parity as k, within the support bound
        assert!(nu.0[0].unsigned_abs() as usize <= k);
        assert_eq!((nu.0[0] - k as i32).rem_euclid(2), 0);
    }
}

#[test]
fn support_stays_within_k_times_forcing_radius() {
    for (spec, w) in all_models() {
        let k = if spec.kind() == ModelKind::LowerTori { 6 } else { 10 };
        let rep = solve_lindstedt(&spec, &w, k).unwrap();
        let bound = spec.mode_radius();
        assert_eq!(rep.series.support_violation(bound), None, "{:?}", spec.kind());
        assert!(rep.order_norms.iter().all(|x| x.is_finite()));
        assert!(rep.hermitian_defect.iter().all(|&d| d <= 1e-10));
    }
}

#[test]
fn phase_shift_covariance() {
    let w = RotationVector::golden_flow();
    let a0 = vec![0.7, -1.9];
    let base = solve_lindstedt(&cos_sum_torus(), &w, 4).unwrap();
    let moved = solve_lindstedt(&cos_sum_torus().with_alpha0(a0.clone()).unwrap(), &w, 4).unwrap();
    for (k, nu, v) in base.series.iter() {
        let ph = nu.phase(&a0);
        let got = moved.series.coeff(k, nu).unwrap();
        for (a, b) in v.iter().zip(got) {
            assert!((a * ph - b).norm() <= 1e-13 * a.norm().max(1e-300));
        }
    }
}

#[test]
fn stationary_classification() {
    let m = |a: i32, b: i32, c: f64| (Mode(vec![a]), Mode(vec![b]), C64::new(c, 0.0));
    // f₀(β) = cos β: maximum at 0, minimum at π
    let f = LowerForcing::Trig(vec![m(0, 1, 0.5), m(0, -1, 0.5), m(1, 0, 0.5), m(-1, 0, 0.5)]);
    let tol = Tolerances::default();
    let top = stationary_point_check(&f, &[0.0], &tol).unwrap();
    assert_eq!(top.extremum, Extremum::Maximum);
    assert!((top.hessian[0][0] + 1.0).abs() < 1e-15);
    assert_eq!((top.positive_eps, top.negative_eps), ("hyperbolic", "elliptic"));
    let bottom = stationary_point_check(&f, &[std::f64::consts::PI], &tol).unwrap();
    assert_eq!(bottom.extremum, Extremum::Minimum);
    assert_eq!((bottom.positive_eps, bottom.negative_eps), ("elliptic", "hyperbolic"));
    assert!(bottom.a[0] < 0.0);
    // β₀ = 1 is not stationary
    let err = ModelSpec::lower_tori(1, 1, vec![1.0], f.clone(), tol).unwrap_err();
    assert!(matches!(err, ModelError::NotStationary { .. }));
    // cos β₁ − cos β₂ has a saddle at the origin
    let n = |b1: i32, b2: i32, c: f64| (Mode(vec![0]), Mode(vec![b1, b2]), C64::new(c, 0.0));
    let g = LowerForcing::Trig(vec![n(1, 0, 0.5), n(-1, 0, 0.5), n(0, 1, -0.5), n(0, -1, -0.5)]);
    let saddle = stationary_point_check(&g, &[0.0, 0.0], &tol).unwrap();
    assert_eq!(saddle.extremum, Extremum::Saddle);
    assert_eq!(saddle.hessian_eigenvalues.len(), 2);
}

#[test]
fn degenerate_hessian_is_rejected() {
    // f₀(z) = z⁴: stationary with a vanishing Hessian
    let p = MultiPoly::from_terms(1, 1, vec![(vec![4], vec![C64::new(1.0, 0.0)])]);
    let f = LowerForcing::Taylor { degree: 6, modes: vec![(Mode(vec![0]), p)] };
    let err = ModelSpec::lower_tori(1, 1, vec![0.0], f, Tolerances::default()).unwrap_err();
    assert!(matches!(err, ModelError::Degenerate { .. }));
}

#[test]
fn taylor_data_runs_out() {
    let p0 = MultiPoly::from_terms(
        1,
        1,
        vec![(vec![2], vec![C64::new(-0.5, 0.0)]), (vec![0], vec![C64::new(1.0, 0.0)])],
    );
    let p1 = MultiPoly::constant(1, vec![C64::new(0.5, 0.0)]);
    let f = LowerForcing::Taylor {
        degree: 3,
        modes: vec![(Mode(vec![0]), p0), (Mode(vec![1]), p1.clone()), (Mode(vec![-1]), p1)],
    };
    let spec = ModelSpec::lower_tori(1, 1, vec![0.0], f, Tolerances::default()).unwrap();
    let w = RotationVector::from_floats(&[QuadraticSurd::golden().value()]).unwrap();
    assert!(solve_lindstedt(&spec, &w, 2).is_ok());
    assert!(matches!(solve_lindstedt(&spec, &w, 6), Err(ModelError::Series(_))));
}

#[test]
fn omega_mismatches_are_rejected() {
    let sm = ModelSpec::standard_map(None).unwrap();
    assert!(matches!(
        solve_lindstedt(&sm, &RotationVector::golden_flow(), 2),
        Err(ModelError::InvalidSpec(_))
    ));
    assert!(matches!(
        solve_lindstedt(&cos_sum_torus(), &golden_rotation(), 2),
        Err(ModelError::InvalidSpec(_))
    ));
    let rational = RotationVector::from_floats(&[1.0, 0.5]).unwrap();
    assert!(matches!(
        solve_lindstedt(&cos_sum_torus(), &rational, 2),
        Err(ModelError::Diophantine(DiophantineError::Rational { .. }))
    ));
    assert!(matches!(solve_lindstedt(&sm, &golden_rotation(), 0), Err(ModelError::InvalidSpec(_))));
}

#[test]
fn solve_options_set_the_stamp() {
    let opts = SolveOptions { nu_max: Some(50), tau: Some(1.5) };
    let rep = solve_lindstedt_with(&cos_sum_torus(), &RotationVector::golden_flow(), 2, &opts).unwrap();
    assert_eq!(rep.stamp.nu_max, 50);
    assert_eq!(rep.stamp.tau, 1.5);
    assert!(rep.stamp.gamma > 0.0);
}

#[test]
fn documents_parse_into_models() {
    let text = r#"{
        "model": "maximal_torus",
        "omega": {"components": [1.0, "golden"], "nu_max": 100},
        "order": 3,
        "forcing": [{"nu": [1, 1], "re": 0.5}, {"nu": [-1, -1], "re": 0.5}]
    }"#;
    let doc: ModelDocument = serde_json::from_str(text).unwrap();
    let spec = doc.model_spec().unwrap();
    let w = doc.rotation_vector().unwrap();
    assert_eq!(spec, cos_sum_torus());
    assert_eq!(w.values(), RotationVector::golden_flow().values());
    assert_eq!(doc.solve_options().nu_max, Some(100));

    let sm: ModelDocument =
        serde_json::from_str(r#"{"model": "standard_map", "omega": {"components": [{"surd": [-1, 1, 5, 2]}]}}"#).unwrap();
    assert!(sm.rotation_vector().unwrap().is_mod_one());
    assert_eq!(sm.model_spec().unwrap(), ModelSpec::standard_map(None).unwrap());

    let cf: ModelDocument = serde_json::from_str(
        r#"{"model": "standard_map", "omega": {"components": [{"cf": {"head": [], "period": [1]}}]}}"#,
    )
    .unwrap();
    let v = cf.rotation_vector().unwrap().values()[0];
    assert!((v - QuadraticSurd::golden().value()).abs() < 1e-15);

    let lower: ModelDocument = serde_json::from_str(
        r#"{"model": "lower_tori", "omega": {"components": ["golden"]}, "beta0": [0.0],
            "forcing": [{"nu": [1], "mu": [0], "re": 0.5}, {"nu": [-1], "mu": [0], "re": 0.5},
                        {"nu": [0], "mu": [1], "re": 0.5}, {"nu": [0], "mu": [-1], "re": 0.5},
                        {"nu": [1], "mu": [-1], "re": 0.25}, {"nu": [-1], "mu": [1], "re": 0.25}]}"#,
    )
    .unwrap();
    assert_eq!(lower.model_spec().unwrap(), lower_torus());

    let diss: ModelDocument = serde_json::from_str(
        r#"{"model": "dissipative", "omega": {"components": [1.0]}, "g_taylor": [0, 0, 0, 1],
            "forcing": [{"nu": [0], "re": 1.0}, {"nu": [1], "re": 0.5}, {"nu": [-1], "re": 0.5}]}"#,
    )
    .unwrap();
    let spec = diss.model_spec().unwrap();
    assert!((spec.c0().unwrap() - 1.0).abs() < 1e-14);
    assert_eq!(spec.damping_a(), Some(3.0));
}

#[test]
fn malformed_documents_are_rejected() {
    let unknown = r#"{"model": "standard_map", "omega": {"components": ["golden"]}, "oops": 1}"#;
    assert!(serde_json::from_str::<ModelDocument>(unknown).is_err());
    let name: ModelDocument =
        serde_json::from_str(r#"{"model": "standard_map", "omega": {"components": ["bronze"]}}"#).unwrap();
    assert!(name.rotation_vector().is_err());
    let two: ModelDocument =
        serde_json::from_str(r#"{"model": "standard_map", "omega": {"components": ["golden", 1.0]}}"#).unwrap();
    assert!(two.rotation_vector().is_err());
    let nomu: ModelDocument = serde_json::from_str(
        r#"{"model": "lower_tori", "omega": {"components": [1.0]}, "beta0": [0.0], "forcing": [{"nu": [1], "re": 1.0}]}"#,
    )
    .unwrap();
    assert!(nomu.model_spec().is_err());
    let mu: ModelDocument = serde_json::from_str(
        r#"{"model": "maximal_torus", "omega": {"components": [1.0]}, "forcing": [{"nu": [1], "mu": [1], "re": 1.0}]}"#,
    )
    .unwrap();
    assert!(mu.model_spec().is_err());
}
