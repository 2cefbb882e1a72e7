use lscv::presets::Preset;
use lscv::processes::{simulate, simulate_stationary};
use lscv::seed::stream;
use lscv::{epanechnikov, make_weight, BandwidthGrid, Innovation, ModelSpec, SeedPolicy};
use proptest::prelude::*;
use rand::Rng;

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, m: usize) -> f64 {
    let step = (b - a) / m as f64;
    let mut acc = f(a) + f(b);
    for i in 1..m {
        acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * step);
    }
    acc * step / 3.0
}

#[test]
fn kernel_integrates_to_one() {
    let k = epanechnikov();
    assert!((simpson(|x| k.evaluate(x), -0.5, 0.5, 1000) - 1.0).abs() < 1e-10);
    assert!((simpson(|x| k.evaluate(x).powi(2), -0.5, 0.5, 1000) - k.mu_k).abs() < 1e-10);
    assert!((simpson(|x| x * x * k.evaluate(x), -0.5, 0.5, 1000) - k.d_k).abs() < 1e-10);
}

#[test]
fn weight_function_examples() {
    let w = make_weight(0.05, 0.95).unwrap();
    assert_eq!(w.eval(0.5), 1.0);
    assert_eq!(w.eval(0.01), 0.0);
    assert_eq!(w.eval(0.05), 1.0);
    assert_eq!(w.eval(0.95), 1.0);
    assert!(make_weight(0.5, 0.5).is_err());
    assert!(make_weight(0.6, 0.5).is_err());
}

#[test]
fn preset_curves_stay_in_their_boxes() {
    for p in Preset::ALL {
        let spec = p.spec(Innovation::Gaussian);
        spec.check_curve(&p.curve(), 2000).unwrap();
    }
}

#[test]
fn preset_curve_derivatives_match_differences() {
    for p in Preset::ALL {
        let c = p.curve();
        for i in 1..50 {
            let u = i as f64 / 50.0;
            let (d1, d2) = (c.eval_d1(u), c.eval_d2(u));
            let (h1, h2) = (1e-5, 1e-4);
            for j in 0..c.dim() {
                let f = |v: f64| c.eval(v)[j];
                let fd1 = (f(u + h1) - f(u - h1)) / (2.0 * h1);
                let fd2 = (f(u + h2) - 2.0 * f(u) + f(u - h2)) / (h2 * h2);
                assert!((d1[j] - fd1).abs() <= 1e-5 * (1.0 + fd1.abs()), "{p} u={u} d1[{j}]");
                assert!((d2[j] - fd2).abs() <= 1e-5 * (1.0 + fd2.abs()), "{p} u={u} d2[{j}]");
            }
        }
    }
}

#[test]
fn innovations_are_standardized() {
    for innov in [Innovation::Gaussian, Innovation::Uniform, Innovation::Exponential] {
        let mut rng = stream(17, 0);
        let n = 1_000_000;
        let draws: Vec<f64> = (0..n).map(|_| innov.sample(&mut rng)).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 0.01, "{} mean {mean}", innov.name());
        assert!((var - 1.0).abs() < 0.01, "{} variance {var}", innov.name());
    }
}

#[test]
fn model_a_local_variance_tracks_the_stationary_value() {
    let p = Preset::A;
    let (spec, curve) = (p.spec(Innovation::Gaussian), p.curve());
    let n = 500;
    let reps = 400;
    for &u in &[0.1, 0.5, 0.6, 0.9] {
        let centre = (u * n as f64) as usize;
        let idx: Vec<usize> = (centre - 5..=centre + 5).collect();
        let mut sum = 0.0;
        for seed in 0..reps {
            let xs = simulate(&spec, &curve, n, seed).unwrap().values;
            sum += idx.iter().map(|&t| xs[t - 1].powi(2)).sum::<f64>() / idx.len() as f64;
        }
        let observed = sum / reps as f64;
        let th = curve.eval(u);
        let expected = th[1].powi(2) / (1.0 - th[0].powi(2));
        assert!((observed / expected - 1.0).abs() < 0.15, "u={u}: {observed} vs {expected}");
    }
}

fn arb_preset() -> impl Strategy<Value = Preset> {
    prop_oneof![Just(Preset::A), Just(Preset::B), Just(Preset::C), Just(Preset::D)]
}

proptest! {
    #[test]
    fn kernel_is_symmetric_and_compact(x in -2.0f64..2.0) {
        let k = epanechnikov();
        prop_assert_eq!(k.evaluate(x), k.evaluate(-x));
        if x.abs() >= 0.5 {
            prop_assert_eq!(k.evaluate(x), 0.0);
        } else {
            prop_assert!(k.evaluate(x) > 0.0);
        }
    }

    #[test]
    fn kernel_weights_respect_support_and_mass(n in 50usize..5000, h in 0.01f64..0.9, frac in 0.0f64..1.0) {
        let k = epanechnikov();
        let u = h / 2.0 + frac * (1.0 - h);
        let w = k.weights(n, u, h).unwrap();
        let nf = n as f64;
        let nonzero = w.iter().filter(|&&v| v != 0.0).count();
        prop_assert!(nonzero as f64 <= (nf * h).ceil() + 1.0);
        let mass = w.iter().sum::<f64>() / nf;
        // Riemann-sum bound with L_K = 12
        prop_assert!((mass - 1.0).abs() <= (2.0 * 12.0 + 2.0) / (nf * h), "mass {}", mass);
    }

    #[test]
    fn weight_is_an_indicator(a in 0.0f64..0.5, len in 0.01f64..0.5, u in 0.0f64..1.0) {
        let b = a + len;
        let w = make_weight(a, b).unwrap();
        prop_assert_eq!(w.eval(u) == 1.0, (a..=b).contains(&u));
        prop_assert!(w.eval(u) == 0.0 || w.eval(u) == 1.0);
        prop_assert!(w.measure() > 0.0);
    }

    #[test]
    fn log_grids_are_ordered(lo in 0.001f64..0.4, span in 0.01f64..0.5, count in 2usize..100) {
        let hi = (lo + span).min(0.999);
        let g = BandwidthGrid::log_spaced(lo, hi, count).unwrap();
        prop_assert_eq!(g.len(), count);
        let pts = g.points();
        prop_assert!(pts.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(pts.iter().all(|&h| h >= g.h_min() && h <= g.h_max() && h > 0.0 && h < 1.0));
    }

    #[test]
    fn seed_streams_are_reproducible_and_distinct(base in any::<u64>(), i in 0u64..1_000_000, j in 0u64..1_000_000) {
        let policy = SeedPolicy::new(base);
        let a: Vec<u64> = { let mut r = policy.derive(i); (0..1000).map(|_| r.random()).collect() };
        let b: Vec<u64> = { let mut r = policy.derive(i); (0..1000).map(|_| r.random()).collect() };
        prop_assert_eq!(&a, &b);
        if i != j {
            let c: Vec<u64> = { let mut r = policy.derive(j); (0..4).map(|_| r.random()).collect() };
            prop_assert_ne!(&a[..4], &c[..]);
        }
    }

    #[test]
    fn simulation_is_deterministic(p in arb_preset(), seed in any::<u64>(), n in 1usize..400) {
        let spec = p.spec(Innovation::Gaussian);
        let a = simulate(&spec, &p.curve(), n, seed).unwrap();
        let b = simulate(&spec, &p.curve(), n, seed).unwrap();
        prop_assert_eq!(a.values.len(), n);
        prop_assert!(a.values.iter().all(|x| x.is_finite()));
        prop_assert_eq!(a.values.iter().map(|x| x.to_bits()).collect::<Vec<_>>(), b.values.iter().map(|x| x.to_bits()).collect::<Vec<_>>());
    }

    #[test]
    fn frozen_curve_matches_stationary(p in arb_preset(), seed in any::<u64>(), u in 0.0f64..1.0) {
        let spec: ModelSpec = p.spec(Innovation::Gaussian);
        let theta = p.curve().eval(u);
        let a = simulate(&spec, &lscv::ParamCurve::constant(&theta), 200, seed).unwrap();
        let b = simulate_stationary(&spec, &theta, 200, seed).unwrap();
        prop_assert_eq!(a.values, b.values);
    }
}
