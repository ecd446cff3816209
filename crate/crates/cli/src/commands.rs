use std::fs;
use std::path::Path;

use lindstedt::analysis::{
    attractivity_check, borel_transform, davie_compare, integrate_ode, melnikov_measure,
    radius_estimate, relaxation_check, response_solution, AttractivityReport, BorelReport,
    DavieReport, MeasureOptions, MeasureReport, OdeOptions, RadiusEstimate, RelaxationReport,
    Verdict,
};
use lindstedt::diophantine::{
    bryuno_function, bryuno_omega, BryunoReport, CfSpec, Component, QuadraticSurd, RotationVector,
};
use lindstedt::models::{
    residual_order_check, solve_lindstedt_with, ComponentDoc, ModelDocument, ModelSpec,
    OrderCheck, SolveReport,
};
use lindstedt::trees::{verify_trees_with, TreeContext, TreeVerification};
use serde::Serialize;
use serde_json::Value;

use crate::error::CliError;
use crate::output::{config_hash, Outputs, Provenance};
use crate::{AnalyzeArgs, BryunoArgs, IntegrateArgs, MeasureArgs, MeasureParams, SolveArgs, VerifyArgs};

const STAMP_RADIUS: u32 = 128;

struct Loaded {
    doc: ModelDocument,
    bytes: Vec<u8>,
    spec: ModelSpec,
    omega: RotationVector,
}

fn load(path: &Path) -> Result<Loaded, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
    let doc: ModelDocument = serde_json::from_slice(&bytes).map_err(|e| CliError::json(path, &e))?;
    let spec = doc.model_spec()?;
    let omega = doc.rotation_vector()?;
    Ok(Loaded { doc, bytes, spec, omega })
}

fn order_of(arg: Option<usize>, doc: &ModelDocument) -> Result<usize, CliError> {
    arg.or(doc.order)
        .ok_or_else(|| CliError::input("no order given: pass --order or set \"order\" in the document"))
}

fn config<T: Serialize>(args: &T, extra: &[(&str, Value)]) -> Value {
    let mut v = serde_json::to_value(args).expect("argument structs serialise");
    if let Value::Object(m) = &mut v {
        for (k, x) in extra {
            m.insert((*k).to_string(), x.clone());
        }
    }
    v
}

fn parse_component(s: &str) -> Result<Component, CliError> {
    let doc: ComponentDoc = serde_json::from_str(s)
        .or_else(|_| serde_json::from_value(Value::String(s.to_string())))
        .map_err(|e| CliError::input(format!("cannot parse rotation number {s:?}: {e}")))?;
    Ok(doc.to_component()?)
}

fn parse_omega(s: &str) -> Result<RotationVector, CliError> {
    let docs: Vec<ComponentDoc> = serde_json::from_str(s)
        .map_err(|e| CliError::input(format!("--omega must be a JSON array of components: {e}")))?;
    let comps = docs
        .iter()
        .map(ComponentDoc::to_component)
        .collect::<Result<Vec<_>, _>>()?;
    Ok(RotationVector::flow(comps)?)
}

fn contract(passed: bool, what: impl FnOnce() -> String) -> Result<(), CliError> {
    if passed {
        Ok(())
    } else {
        Err(CliError::Contract(what()))
    }
}

fn ln_rows(values: &[f64]) -> Vec<(f64, f64)> {
    values
        .iter()
        .enumerate()
        .filter(|(_, v)| **v > 0.0)
        .map(|(i, v)| ((i + 1) as f64, v.ln()))
        .collect()
}

#[derive(Serialize)]
struct SolveOut<'a> {
    solve: &'a SolveReport,
    residual: Option<OrderCheck>,
}

pub fn solve(out: &Path, args: &SolveArgs) -> Result<(), CliError> {
    let l = load(&args.spec)?;
    let k = order_of(args.order, &l.doc)?;
    let rep = solve_lindstedt_with(&l.spec, &l.omega, k, &l.doc.solve_options())?;
    let residual = match args.residual_eps.as_deref() {
        Some(&[e1, e2]) => Some(residual_order_check(&l.spec, &l.omega, &rep.series, e1, e2)?),
        Some(_) => return Err(CliError::input("--residual-eps takes exactly two values")),
        None => None,
    };
    let passed = residual.as_ref().is_none_or(|r| r.contract_met);
    let cfg = config(args, &[("order", k.into())]);
    let hash = config_hash(&cfg, Some(&l.bytes));
    let mut o = Outputs::new(out)?;
    o.text("series.csv", &rep.series.to_csv())?;
    o.report(
        "solve.json",
        "solve",
        &cfg,
        &hash,
        &[Provenance::from(&rep.stamp)],
        passed,
        &SolveOut { solve: &rep, residual: residual.clone() },
    )?;
    o.plot("norms.dat", "k ln|u^(k)|", ln_rows(&rep.order_norms))?;
    contract(passed, || {
        let r = residual.expect("only residual checks fail");
        format!("residual exponent {:.3} below K + 0.8 = {:.1}", r.p, k as f64 + 0.8)
    })
}

pub fn verify_trees(out: &Path, args: &VerifyArgs) -> Result<(), CliError> {
    let l = load(&args.spec)?;
    let k = order_of(args.order, &l.doc)?;
    let opts = l.doc.solve_options();
    let mut ctx = TreeContext::new(&l.spec, &l.omega, k)?;
    let orders: Vec<TreeVerification> = (1..=k)
        .map(|j| verify_trees_with(&mut ctx, j, args.tol, &opts))
        .collect::<Result<_, _>>()?;
    let mut provenance: Vec<Provenance> = Vec::new();
    for v in &orders {
        let p = Provenance::from(&v.stamp);
        if !provenance.iter().any(|q| q.nu_max == p.nu_max && q.tau == p.tau) {
            provenance.push(p);
        }
    }
    let worst = orders.iter().map(|v| v.worst_rel_error).fold(0.0, f64::max);
    let passed = orders.iter().all(|v| v.passed);
    let cfg = config(args, &[("order", k.into())]);
    let hash = config_hash(&cfg, Some(&l.bytes));
    let mut o = Outputs::new(out)?;
    o.report("verify.json", "verify-trees", &cfg, &hash, &provenance, passed, &orders)?;
    contract(passed, || format!("tree sums differ from the recursion: worst relative error {worst:e}"))
}

#[derive(Serialize)]
struct BryunoOut<'a> {
    alpha_or_omega: Vec<f64>,
    #[serde(flatten)]
    report: &'a BryunoReport,
}

pub fn bryuno(out: &Path, args: &BryunoArgs) -> Result<(), CliError> {
    let (rep, stamp, bytes, values) = if let Some(a) = &args.alpha {
        let c = parse_component(a)?;
        let rep = bryuno_function(&c, args.n_max.unwrap_or(60))?;
        let w = RotationVector::rotation_number(c)?.verified(None, STAMP_RADIUS)?;
        (rep, w.stamp().cloned(), None, w.values().to_vec())
    } else {
        let (w, bytes) = match (&args.omega, &args.spec) {
            (Some(s), _) => (parse_omega(s)?, None),
            (None, Some(p)) => {
                let l = load(p)?;
                (l.omega, Some(l.bytes))
            }
            (None, None) => return Err(CliError::input("give one of --alpha, --omega or --spec")),
        };
        let rep = if w.dim() == 1 {
            bryuno_function(&w.components()[0], args.n_max.unwrap_or(60))?
        } else {
            bryuno_omega(&w, args.n_max.unwrap_or(12))?
        };
        let w = w.verified(None, STAMP_RADIUS)?;
        (rep, w.stamp().cloned(), bytes, w.values().to_vec())
    };
    let cfg = config(args, &[]);
    let hash = config_hash(&cfg, bytes.as_deref());
    let provenance: Vec<Provenance> = stamp.iter().map(Provenance::from).collect();
    let mut o = Outputs::new(out)?;
    let body = BryunoOut { alpha_or_omega: values, report: &rep };
    o.report("bryuno.json", "bryuno", &cfg, &hash, &provenance, true, &body)?;
    o.plot(
        "bryuno.dat",
        "n partial_sum",
        rep.partial_sums.iter().enumerate().map(|(n, s)| (n as f64, *s)),
    )?;
    Ok(())
}

#[derive(Serialize)]
struct MeasureSweep {
    a_list: Vec<f64>,
    eps0: Vec<f64>,
    fractions: Vec<f64>,
    /// Excluded fraction nonincreasing under each halving.
    monotone: bool,
    reports: Vec<MeasureReport>,
}

fn measure_sweep(omega: &RotationVector, a_from_spec: Option<Vec<f64>>, p: &MeasureParams) -> Result<MeasureSweep, CliError> {
    let a_list = p
        .a
        .clone()
        .or(a_from_spec)
        .ok_or_else(|| CliError::input("no normal eigenvalues: pass --a"))?;
    let tau = p.tau.unwrap_or_else(|| omega.default_tau());
    let tau_prime = p.tau_prime.unwrap_or(tau + omega.dim() as f64 + 1.0);
    let mut reports = Vec::with_capacity(p.halvings + 1);
    let mut eps0 = p.eps0;
    for _ in 0..=p.halvings {
        let mut opts = MeasureOptions::new(a_list.clone(), p.gamma, tau, tau_prime, eps0);
        opts.nu_max = p.nu_max;
        opts.grid_n = p.grid_n;
        reports.push(melnikov_measure(omega, &opts)?);
        eps0 /= 2.0;
    }
    let fractions: Vec<f64> = reports.iter().map(|r| r.excluded_fraction).collect();
    let monotone = fractions.windows(2).all(|w| w[1] <= w[0]);
    Ok(MeasureSweep {
        a_list,
        eps0: (0..=p.halvings).map(|i| p.eps0 / 2f64.powi(i as i32)).collect(),
        fractions,
        monotone,
        reports,
    })
}

fn sweep_rows(s: &MeasureSweep) -> Vec<(f64, f64)> {
    s.eps0.iter().copied().zip(s.fractions.iter().copied()).collect()
}

pub fn measure(out: &Path, args: &MeasureArgs) -> Result<(), CliError> {
    let (omega, a_spec, bytes) = match (&args.omega, &args.spec) {
        (Some(s), _) => (parse_omega(s)?, None, None),
        (None, Some(p)) => {
            let l = load(p)?;
            (l.omega, l.spec.normal_eigenvalues(), Some(l.bytes))
        }
        (None, None) => return Err(CliError::input("give --omega or --spec")),
    };
    let sweep = measure_sweep(&omega, a_spec, &args.params)?;
    let cfg = config(args, &[]);
    let hash = config_hash(&cfg, bytes.as_deref());
    let w = omega.verified(args.params.tau, STAMP_RADIUS)?;
    let provenance: Vec<Provenance> = w.stamp().iter().map(|s| Provenance::from(*s)).collect();
    let mut o = Outputs::new(out)?;
    o.report("measure.json", "measure", &cfg, &hash, &provenance, sweep.monotone, &sweep)?;
    o.plot("measure.dat", "eps0 excluded_fraction", sweep_rows(&sweep))?;
    contract(sweep.monotone, || {
        format!("excluded fraction grew under halving: {:?}", sweep.fractions)
    })
}

fn davie_defaults() -> Vec<(String, Component)> {
    let spike = |a: u64| Component::Cf(CfSpec::new(vec![1, a], vec![1]).expect("valid expansion"));
    vec![
        ("golden".into(), Component::Surd(QuadraticSurd::golden())),
        ("[0;1,200,1,...]".into(), spike(200)),
        ("[0;1,100000,1,...]".into(), spike(100_000)),
    ]
}

#[derive(Serialize, Default)]
struct AnalyzeOut {
    order_norms: Vec<f64>,
    radius: Option<RadiusEstimate>,
    borel: Option<BorelReport>,
    davie: Option<DavieReport>,
    measure: Option<MeasureSweep>,
    attractivity: Option<AttractivityReport>,
}

pub fn analyze(out: &Path, args: &AnalyzeArgs) -> Result<(), CliError> {
    let l = load(&args.spec)?;
    let k = order_of(args.order, &l.doc)?;
    let any = args.radius || args.davie || args.borel || args.measure || args.integrate;
    let (do_radius, do_borel) = if any { (args.radius, args.borel) } else { (true, true) };

    let rep = solve_lindstedt_with(&l.spec, &l.omega, k, &l.doc.solve_options())?;
    let mut provenance = vec![Provenance::from(&rep.stamp)];
    let mut res = AnalyzeOut {
        order_norms: rep.order_norms.clone(),
        ..Default::default()
    };
    let mut failures = Vec::new();
    let mut o = Outputs::new(out)?;

    if do_radius {
        res.radius = Some(radius_estimate(&rep.order_norms)?);
        o.plot("norms.dat", "k ln|u^(k)|", ln_rows(&rep.order_norms))?;
    }
    if do_borel {
        let b = borel_transform(&rep.order_norms)?;
        o.plot("borel.dat", "k ln(|u^(k)|/k!)", ln_rows(&b.transformed))?;
        res.borel = Some(b);
    }
    if args.davie {
        let mut alphas = davie_defaults();
        for s in &args.alphas {
            alphas.push((s.clone(), parse_component(s)?));
        }
        let d = davie_compare(&alphas, k)?;
        provenance.extend(d.entries.iter().map(|e| Provenance::from(&e.stamp)));
        if !d.violations.is_empty() {
            failures.push(format!("radius ranking contradicts the Bryuno ranking for pairs {:?}", d.violations));
        }
        res.davie = Some(d);
    }
    if args.measure {
        let s = measure_sweep(&l.omega, l.spec.normal_eigenvalues(), &args.measure_params)?;
        o.plot("measure.dat", "eps0 excluded_fraction", sweep_rows(&s))?;
        if !s.monotone {
            failures.push(format!("excluded fraction grew under halving: {:?}", s.fractions));
        }
        res.measure = Some(s);
    }
    if args.integrate {
        let a = attractivity_check(&l.spec, &l.omega, &OdeOptions::new(args.eps, k))?;
        if a.verdict == Verdict::NotAttractive {
            failures.push("offset trajectory left the tube around the response solution".into());
        }
        res.attractivity = Some(a);
    }

    let passed = failures.is_empty();
    let cfg = config(args, &[("order", k.into())]);
    let hash = config_hash(&cfg, Some(&l.bytes));
    o.report("analyze.json", "analyze", &cfg, &hash, &provenance, passed, &res)?;
    contract(passed, || failures.join("; "))
}

#[derive(Serialize)]
struct IntegrateOut {
    attractivity: AttractivityReport,
    relaxation: Option<RelaxationReport>,
}

fn decimate(n: usize, keep: usize) -> impl Iterator<Item = usize> {
    let stride = n.div_ceil(keep.max(1)).max(1);
    (0..n).step_by(stride)
}

pub fn integrate(out: &Path, args: &IntegrateArgs) -> Result<(), CliError> {
    let l = load(&args.spec)?;
    let mut opts = OdeOptions::new(args.eps, args.order);
    opts.t_final = args.t_final;
    opts.h = args.h;
    opts.offset = args.offset;
    let att = attractivity_check(&l.spec, &l.omega, &opts)?;
    let t_final = opts.resolved_t_final(&l.omega);
    let h = opts.resolved_h(&l.omega);
    let relaxation = if args.relaxation {
        Some(relaxation_check(&l.spec, args.eps, args.offset, t_final, h)?)
    } else {
        None
    };

    let mut o = Outputs::new(out)?;
    if att.verdict != Verdict::NotApplicable {
        let resp = response_solution(&l.spec, &l.omega, args.eps, args.order)?;
        let tr = integrate_ode(&l.spec, &l.omega, args.eps, resp.x(0.0) + args.offset, resp.v(0.0), t_final, h)?;
        let idx: Vec<usize> = decimate(tr.t.len(), args.samples).collect();
        o.plot("trajectory.dat", "t x", idx.iter().map(|&i| (tr.t[i], tr.x[i])))?;
        o.plot(
            "deviation.dat",
            "t |x - x_K|",
            idx.iter().map(|&i| (tr.t[i], (tr.x[i] - resp.x(tr.t[i])).abs())),
        )?;
    }

    let passed = att.verdict != Verdict::NotAttractive;
    let provenance: Vec<Provenance> = att.stamp.iter().map(Provenance::from).collect();
    let cfg = config(args, &[("t_final", t_final.into()), ("h", h.into())]);
    let hash = config_hash(&cfg, Some(&l.bytes));
    let out_rep = IntegrateOut { attractivity: att, relaxation };
    o.report("integrate.json", "integrate", &cfg, &hash, &provenance, passed, &out_rep)?;
    contract(passed, || "offset trajectory left the tube around the response solution".into())
}
