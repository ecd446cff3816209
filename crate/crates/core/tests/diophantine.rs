use lindstedt::diophantine::{
    bryuno_function, bryuno_omega, continued_fraction, diophantine_constant, scale_of,
    scale_of_divisor, CfSpec, Component, QuadraticSurd, RotationVector,
};
use lindstedt::series::Mode;
use num_bigint::BigUint;
use proptest::prelude::*;

/// `Σ_{n=0}^{N} ln(q_{n+1})/q_n` by direct summation over the quotients `a₁, a₂, …`.
fn direct_bryuno(quotients: &[u64], terms: usize) -> f64 {
    let (mut prev, mut cur) = (0.0_f64, 1.0_f64);
    let mut qs = vec![cur];
    for &a in quotients.iter().take(terms + 1) {
        let next = a as f64 * cur + prev;
        prev = cur;
        cur = next;
        qs.push(cur);
    }
    (0..=terms).map(|n| qs[n + 1].ln() / qs[n]).sum()
}

fn quotients(spec: &CfSpec, n: usize) -> Vec<u64> {
    (1..=n).map(|i| spec.quotient(i)).collect()
}

#[test]
fn golden_and_silver_expansions() {
    let g = continued_fraction(&Component::Surd(QuadraticSurd::golden()), 30).unwrap();
    assert!(g.quotients.iter().all(|&a| a == 1));
    let fib: Vec<u64> = g.denominators.iter().map(|q| q.to_string().parse().unwrap()).collect();
    assert_eq!(&fib[..8], &[1, 1, 2, 3, 5, 8, 13, 21]);
    let s = continued_fraction(&Component::Surd(QuadraticSurd::silver()), 30).unwrap();
    assert!(s.quotients.iter().all(|&a| a == 2));
}

#[test]
fn large_quotient_raises_bryuno_by_its_log() {
    let golden = bryuno_function(&Component::Surd(QuadraticSurd::golden()), 60).unwrap();
    let spec = CfSpec::new(vec![1, 1, 1, 1, 1, 1_000_000], vec![1]).unwrap();
    let spiked = bryuno_function(&Component::Cf(spec.clone()), 60).unwrap();
    let direct = direct_bryuno(&quotients(&spec, 70), 60);
    assert!((spiked.value - direct).abs() < 1e-12 * direct);
    // The spike follows q₅ = 8, q₄ = 5: the term at n = 5 gains log(10⁶)/8,
    // loses log(13/8)/8, and the golden tail beyond it collapses.
    let golden_tail = direct_bryuno(&[1; 80], 60) - direct_bryuno(&[1; 80], 5);
    let expected = (1e6_f64).ln() / 8.0 - (13.0_f64 / 8.0).ln() / 8.0 - golden_tail;
    let gain = spiked.value - golden.value;
    assert!(gain > 0.0);
    assert!((gain - expected).abs() < 1e-5, "gain {gain}, expected {expected}");
}

#[test]
fn small_quotient_increase_can_lower_bryuno() {
    // Raising a late quotient from 1 to 2 inflates every later q_n and the
    // tail loses more than the single term gains.
    let golden = bryuno_function(&Component::Surd(QuadraticSurd::golden()), 60).unwrap();
    let mut head = vec![1; 11];
    head.push(2);
    let bumped = bryuno_function(&Component::Cf(CfSpec::new(head, vec![1]).unwrap()), 60).unwrap();
    assert!(bumped.value < golden.value);
}

#[test]
fn million_spike_after_a_large_denominator_lowers_bryuno() {
    // q₆ ≈ 1.7·10⁶: the spike gains log(10⁶)/q₆ but the tail it removes is larger.
    let head = vec![3, 11, 19, 13, 14, 15, 1];
    let mut spiked = head.clone();
    spiked[6] = 1_000_000;
    let b0 = bryuno_function(&Component::Cf(CfSpec::new(head, vec![1]).unwrap()), 60).unwrap();
    let b1 = bryuno_function(&Component::Cf(CfSpec::new(spiked, vec![1]).unwrap()), 60).unwrap();
    assert!(b1.value < b0.value);
}

#[test]
fn bryuno_report_invariants() {
    let r = bryuno_function(&Component::Cf(CfSpec::new(vec![3, 7], vec![1, 2]).unwrap()), 100).unwrap();
    assert!(r.partial_sums.windows(2).all(|w| w[1] >= w[0]));
    let q = r.q_n.as_ref().unwrap();
    assert!(q.windows(2).all(|w| w[1] > w[0]));
    assert!(r.converged);
}

#[test]
fn gamma_is_monotone_in_radius_and_exponent() {
    let w = RotationVector::rotation_number(Component::Surd(QuadraticSurd::golden())).unwrap();
    let g: Vec<f64> = [100, 1000, 10_000]
        .iter()
        .map(|&m| diophantine_constant(&w, 1.0, m).unwrap().gamma)
        .collect();
    assert!(g.windows(2).all(|p| p[1] <= p[0]), "{g:?}");
    // attained at q = 1: ‖α‖ = 1/(α + 2)
    let alpha = QuadraticSurd::golden().value();
    assert!((g[2] - 1.0 / (alpha + 2.0)).abs() < 1e-12, "{}", g[2]);

    let flow = RotationVector::golden_flow();
    let by_tau: Vec<f64> = [1.0, 1.5, 2.0, 3.0]
        .iter()
        .map(|&t| diophantine_constant(&flow, t, 200).unwrap().gamma)
        .collect();
    assert!(by_tau.windows(2).all(|p| p[1] >= p[0]), "{by_tau:?}");
}

#[test]
fn vector_bryuno_minimizers_are_fibonacci() {
    let r = bryuno_omega(&RotationVector::golden_flow(), 12).unwrap();
    let alpha = r.alpha_n.as_ref().unwrap();
    assert!(alpha.windows(2).all(|w| w[1] <= w[0]));
    assert!(r.partial_sums.windows(2).all(|w| w[1] >= w[0]));
    let mut fib = vec![1_i64, 1];
    while fib.len() < 40 {
        let n = fib.len();
        fib.push(fib[n - 1] + fib[n - 2]);
    }
    for nu in r.minimizers.as_ref().unwrap() {
        let (p, q) = (nu.0[0].abs() as i64, nu.0[1].abs() as i64);
        let consecutive = fib.windows(2).any(|w| w[0] == p && w[1] == q);
        assert!(consecutive, "minimizer {nu} is not a Fibonacci pair");
    }
}

#[test]
fn scalar_and_vector_bryuno_stay_in_a_band() {
    let alpha = Component::Surd(QuadraticSurd::golden());
    let b = bryuno_function(&alpha, 60).unwrap().value;
    let w = RotationVector::rotation_number(alpha).unwrap();
    let ratios: Vec<f64> = (8..=14).map(|n| bryuno_omega(&w, n).unwrap().value / b).collect();
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0_f64), |(l, h), &r| (l.min(r), h.max(r)));
    assert!(lo > 0.0 && hi / lo < 1.5, "{ratios:?}");
}

#[test]
fn rational_flow_is_rejected() {
    let w = RotationVector::from_floats(&[1.0, 0.75]).unwrap();
    assert!(bryuno_omega(&w, 6).is_err());
    assert!(diophantine_constant(&w, 1.0, 20).is_err());
}

#[test]
fn scale_examples() {
    let g = 0.3;
    assert_eq!(scale_of_divisor(g, g), 0);
    assert_eq!(scale_of_divisor(0.6 * g / 8.0, g), 4);
    let w = RotationVector::golden_flow();
    assert_eq!(scale_of(&Mode(vec![0, 0]), &w, g), -1);
}

proptest! {
    #[test]
    fn denominators_follow_the_recurrence(
        head in prop::collection::vec(1u64..60, 0..6),
        period in prop::collection::vec(1u64..9, 1..4),
    ) {
        let spec = CfSpec::new(head, period).unwrap();
        let cf = continued_fraction(&Component::Cf(spec), 25).unwrap();
        let q = &cf.denominators;
        prop_assert_eq!(&q[0], &BigUint::from(1u32));
        prop_assert_eq!(&q[1], &BigUint::from(cf.quotients[0]));
        for n in 1..cf.quotients.len() {
            prop_assert_eq!(&q[n + 1], &(&q[n] * BigUint::from(cf.quotients[n]) + &q[n - 1]));
            prop_assert!(q[n + 1] > q[n]);
        }
    }

    #[test]
    fn bryuno_matches_direct_summation(
        head in prop::collection::vec(1u64..40, 0..5),
        period in prop::collection::vec(1u64..6, 1..3),
    ) {
        let spec = CfSpec::new(head, period).unwrap();
        let r = bryuno_function(&Component::Cf(spec.clone()), 40).unwrap();
        let direct = direct_bryuno(&quotients(&spec, 50), 40);
        prop_assert!((r.value - direct).abs() <= 1e-12 * direct.max(1.0));
    }

    #[test]
    fn dominant_spike_never_lowers_bryuno(
        head in prop::collection::vec(1u64..6, 1..7),
        at in 0usize..7,
    ) {
        // A quotient A with log(A/a) well above the log of the denominators
        // it follows; smaller spikes can lower B (tests above).
        let i = at % head.len();
        let (mut prev, mut q) = (0u64, 1u64);
        for &a in &head[..=i] {
            let next = a * q + prev;
            prev = q;
            q = next;
        }
        let spike = head[i] * (3 * q).pow(3);
        let base = CfSpec::new(head.clone(), vec![1]).unwrap();
        let mut spiked = head.clone();
        spiked[i] = spike;
        let spiked = CfSpec::new(spiked, vec![1]).unwrap();
        let b0 = bryuno_function(&Component::Cf(base), 60).unwrap().value;
        let b1 = bryuno_function(&Component::Cf(spiked), 60).unwrap().value;
        prop_assert!(b1 >= b0, "{} < {}", b1, b0);
    }

    #[test]
    fn scales_partition_the_divisors(x in 1e-12f64..10.0, gamma in 1e-3f64..5.0) {
        let n = scale_of_divisor(x, gamma);
        if n == 0 {
            prop_assert!(x >= gamma);
        } else {
            let lo = gamma * 2f64.powi(-n);
            prop_assert!(lo <= x && x < 2.0 * lo, "x = {}, n = {}", x, n);
        }
    }
}
