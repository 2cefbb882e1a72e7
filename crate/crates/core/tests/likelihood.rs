use lscv::likelihood::{
    ell_tvar, ell_tvarch, ell_tvma1, ell_tvtar1, local_likelihood, local_likelihood_derivs, objective_for, Objective,
    Order, TruncatedPast,
};
use lscv::presets::Preset;
use lscv::processes::simulate_stationary;
use lscv::{epanechnikov, Family, Innovation, ModelSpec, ThetaBox};
use proptest::prelude::*;

const FAMILIES: [Family; 5] = [
    Family::TvAr { order: 1 },
    Family::TvAr { order: 2 },
    Family::TvMa1,
    Family::TvArch { order: 1 },
    Family::TvTar1,
];

fn interior(bounds: &ThetaBox, frac: &[f64]) -> Vec<f64> {
    (0..bounds.dim())
        .map(|i| {
            let (lo, hi) = (bounds.lower[i], bounds.upper[i].min(5.0));
            lo + (0.1 + 0.8 * frac[i]) * (hi - lo)
        })
        .collect()
}

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let diff = a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let scale = b.iter().map(|x| x.abs()).fold(0.0, f64::max);
    diff / scale.max(1e-8)
}

fn check_derivatives(obj: &dyn Objective, x: f64, past: &[f64], theta: &[f64]) -> (f64, f64, f64) {
    let p = theta.len();
    let past = TruncatedPast::from_values(past);
    let at = |th: &[f64]| obj.term(x, &past, th).unwrap();
    let base = at(theta);
    let mut fd_grad = vec![0.0; p];
    let mut fd_hess = vec![0.0; p * p];
    for i in 0..p {
        let step = 1e-5 * theta[i].abs().max(0.1);
        let mut up = theta.to_vec();
        let mut dn = theta.to_vec();
        up[i] += step;
        dn[i] -= step;
        let (fu, fdn) = (at(&up), at(&dn));
        fd_grad[i] = (fu.value - fdn.value) / (2.0 * step);
        for j in 0..p {
            fd_hess[j * p + i] = (fu.grad[j] - fdn.grad[j]) / (2.0 * step);
        }
    }
    let mut asym: f64 = 0.0;
    for i in 0..p {
        for j in 0..p {
            asym = asym.max((base.h(i, j) - base.h(j, i)).abs());
        }
    }
    (rel_err(&base.grad, &fd_grad), rel_err(&base.hess, &fd_hess), asym)
}

#[test]
fn point_examples() {
    let half_log_tau = 0.5 * (std::f64::consts::TAU).ln();
    let zero = TruncatedPast::from_values(&[]);
    assert!((ell_tvar(0.0, &zero, &[0.0, 1.0]).unwrap() - 0.9189385332046727).abs() < 1e-15);
    let one = [1.0];
    assert!((ell_tvar(1.0, &TruncatedPast::from_values(&one), &[1.0, 1.0]).unwrap() - half_log_tau).abs() < 1e-15);
    assert!(ell_tvar(0.0, &zero, &[0.0, 0.0]).is_err());
    assert!(ell_tvma1(0.0, &zero, &[1.0, 1.0]).is_err());
    let v = ell_tvarch(0.5, &zero, &[0.4, 0.2]).unwrap();
    assert!((v - (0.5 * (std::f64::consts::TAU * 0.4).ln() + 0.25 / 0.8)).abs() < 1e-14);
    // a₁ = a₂ = c gives c |y|
    let neg = [-2.0];
    let lhs = ell_tvtar1(0.3, &TruncatedPast::from_values(&neg), &[0.4, 0.4, 1.0]).unwrap();
    let rhs = ell_tvar(0.3, &TruncatedPast::from_values(&[2.0]), &[0.4, 1.0]).unwrap();
    assert!((lhs - rhs).abs() < 1e-15);
}

#[test]
fn arch_score_vanishes_at_exact_fit() {
    let obj = objective_for(Family::TvArch { order: 1 });
    let past = [1.0];
    let v: f64 = 0.4 + 0.2;
    let acc = obj.term(v.sqrt(), &TruncatedPast::from_values(&past), &[0.4, 0.2]).unwrap();
    assert!(acc.grad[0].abs() < 1e-15);
}

#[test]
fn fixed_point_gradients() {
    let cases: [(Family, f64, &[f64], &[f64]); 2] = [
        (Family::TvAr { order: 1 }, 0.3, &[0.1], &[0.5, 0.8]),
        (Family::TvArch { order: 1 }, 0.5, &[1.0], &[0.4, 0.2]),
    ];
    for (fam, x, past, theta) in cases {
        let (g, h, s) = check_derivatives(objective_for(fam).as_ref(), x, past, theta);
        assert!(g < 1e-6 && h < 1e-5 && s < 1e-12, "{}: {g} {h} {s}", fam.name());
    }
}

fn brute_force(fam: Family, xs: &[f64], u: f64, h: f64, theta: &[f64], skip: Option<usize>) -> f64 {
    let n = xs.len();
    let k = epanechnikov();
    let mut total = 0.0;
    for t in 1..=n {
        if Some(t) == skip || t <= fam.max_lag().unwrap_or(0) {
            continue;
        }
        let w = k.evaluate((t as f64 / n as f64 - u) / h) / h;
        if w == 0.0 {
            continue;
        }
        let past: Vec<f64> = (1..t).rev().map(|j| xs[j - 1]).collect();
        let past = TruncatedPast::from_values(&past);
        let ell = match fam {
            Family::TvAr { .. } => ell_tvar(xs[t - 1], &past, theta),
            Family::TvMa1 => ell_tvma1(xs[t - 1], &past, theta),
            Family::TvArch { .. } => ell_tvarch(xs[t - 1], &past, theta),
            Family::TvTar1 => ell_tvtar1(xs[t - 1], &past, theta),
        }
        .unwrap();
        total += w * ell;
    }
    total / n as f64
}

#[test]
fn local_sum_matches_brute_force() {
    for p in Preset::ALL {
        let xs = simulate_stationary(&p.spec(Innovation::Gaussian), &p.curve().eval(0.3), 50, 7).unwrap().values;
        let theta = p.curve().eval(0.6);
        for &(u, h) in &[(0.5, 0.3), (0.1, 0.5), (0.97, 0.2)] {
            let fast = local_likelihood(objective_for(p.family()).as_ref(), &xs, &epanechnikov(), u, h, &theta, None).unwrap();
            let slow = brute_force(p.family(), &xs, u, h, &theta, None);
            assert!((fast - slow).abs() <= 1e-10 * slow.abs().max(1.0), "{p} u={u}: {fast} vs {slow}");
        }
    }
}

#[test]
fn single_observation_window() {
    let obj = objective_for(Family::TvMa1);
    let xs = [0.7];
    let v = local_likelihood(obj.as_ref(), &xs, &epanechnikov(), 1.0, 0.5, &[0.3, 1.2], None).unwrap();
    let ell = ell_tvma1(0.7, &TruncatedPast::from_values(&[]), &[0.3, 1.2]).unwrap();
    assert!((v - 1.5 / 0.5 * ell).abs() < 1e-14);
}

/// Sample mean and covariance of the score along a stationary path.
fn score_moments(fam: Family, theta: &[f64], n: usize, seed: u64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let spec = ModelSpec::standard(fam, Innovation::Gaussian);
    let xs = simulate_stationary(&spec, theta, n + 200, seed).unwrap().values;
    let obj = objective_for(fam);
    let p = theta.len();
    let mut sum = vec![0.0; p];
    let mut outer = vec![0.0; p * p];
    for t in 201..=n + 200 {
        let g = obj.term(xs[t - 1], &TruncatedPast::new(&xs, t), theta).unwrap().grad;
        for i in 0..p {
            sum[i] += g[i];
            for j in 0..p {
                outer[i * p + j] += g[i] * g[j];
            }
        }
    }
    let nf = n as f64;
    let mean: Vec<f64> = sum.iter().map(|s| s / nf).collect();
    let cov: Vec<f64> = (0..p * p).map(|k| outer[k] / nf - mean[k / p] * mean[k % p]).collect();
    let se: Vec<f64> = (0..p).map(|i| (cov[i * p + i] / nf).sqrt()).collect();
    (mean, se, cov)
}

#[test]
fn score_has_mean_zero_at_the_truth() {
    let cases: [(Family, &[f64]); 4] = [
        (Family::TvAr { order: 1 }, &[0.5, 0.8]),
        (Family::TvMa1, &[0.5, 1.0]),
        (Family::TvArch { order: 1 }, &[0.4, 0.2]),
        (Family::TvTar1, &[0.4, -0.3, 1.0]),
    ];
    for (i, (fam, theta)) in cases.into_iter().enumerate() {
        let (mean, se, _) = score_moments(fam, theta, 100_000, 31 + i as u64);
        for j in 0..theta.len() {
            assert!(mean[j].abs() < 4.0 * se[j], "{}: component {j} mean {} se {}", fam.name(), mean[j], se[j]);
        }
    }
}

#[test]
fn score_covariance_matches_v_for_linear_models() {
    // V = diag(1/(1−α²), 2/σ²) for both AR(1) and MA(1)
    for (i, fam) in [Family::TvAr { order: 1 }, Family::TvMa1].into_iter().enumerate() {
        let (alpha, sigma) = (0.5, 0.8);
        let (_, _, cov) = score_moments(fam, &[alpha, sigma], 100_000, 90 + i as u64);
        let v = [1.0 / (1.0 - alpha * alpha), 0.0, 0.0, 2.0 / (sigma * sigma)];
        let diff: f64 = cov.iter().zip(&v).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let norm: f64 = v.iter().map(|b| b * b).sum::<f64>().sqrt();
        assert!(diff / norm < 0.05, "{}: {cov:?}", fam.name());
    }
}

#[test]
fn ma_zero_padding_effect_decays_geometrically() {
    for &alpha in &[0.5, 0.9] {
        let theta = [alpha, 1.0];
        let spec = ModelSpec::standard(Family::TvMa1, Innovation::Gaussian);
        let full = simulate_stationary(&spec, &theta, 3000, 4).unwrap().values;
        let offset = 1000;
        let cut = &full[offset..];
        let obj = objective_for(Family::TvMa1);
        let mut worst: f64 = 0.0;
        for t in 50..=400 {
            let a = obj.term(cut[t - 1], &TruncatedPast::new(cut, t), &theta).unwrap().value;
            let b = obj.term(full[offset + t - 1], &TruncatedPast::new(&full, offset + t), &theta).unwrap().value;
            let d = (a - b).abs();
            // |Δℓ| ≤ |e| |Δe| + |Δe|² / 2 with |Δe| ≤ α^t |e_0|-scale terms
            assert!(d <= 50.0 * alpha.powi(t as i32), "α={alpha} t={t}: {d}");
            if alpha.powi(t as i32) < 1e-6 {
                worst = worst.max(d);
            }
        }
        assert!(worst < 1e-4, "α={alpha}: {worst}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn analytic_derivatives_match_differences(
        which in 0usize..5,
        x in -3.0f64..3.0,
        past in proptest::collection::vec(-3.0f64..3.0, 1..40),
        frac in proptest::collection::vec(0.0f64..1.0, 3),
    ) {
        let fam = FAMILIES[which];
        let theta = interior(&ThetaBox::standard(fam), &frac);
        let (g, h, s) = check_derivatives(objective_for(fam).as_ref(), x, &past, &theta);
        prop_assert!(g < 1e-6, "{}: gradient error {}", fam.name(), g);
        prop_assert!(h < 1e-5, "{}: Hessian error {}", fam.name(), h);
        prop_assert!(s < 1e-12);
    }

    #[test]
    fn leave_one_out_removes_exactly_one_term(
        p in prop_oneof![Just(Preset::A), Just(Preset::B), Just(Preset::C), Just(Preset::D)],
        seed in 0u64..500,
        u in 0.0f64..1.0,
        h in 0.05f64..0.9,
        s_frac in 0.0f64..1.0,
    ) {
        let n = 120;
        let xs = simulate_stationary(&p.spec(Innovation::Gaussian), &p.curve().eval(0.2), n, seed).unwrap().values;
        let s = 1 + ((n - 1) as f64 * s_frac) as usize;
        let theta = p.curve().eval(u);
        let k = epanechnikov();
        let obj = objective_for(p.family());
        let full = local_likelihood_derivs(obj.as_ref(), &xs, &k, u, h, &theta, None, Order::Hessian).unwrap();
        let loo = local_likelihood_derivs(obj.as_ref(), &xs, &k, u, h, &theta, Some(s), Order::Hessian).unwrap();
        let w = k.evaluate((s as f64 / n as f64 - u) / h) / h / n as f64;
        let term = if s > p.family().max_lag().unwrap_or(0) {
            obj.term(xs[s - 1], &TruncatedPast::new(&xs, s), &theta).unwrap().value
        } else {
            0.0
        };
        let lhs = full.value - loo.value;
        prop_assert!((lhs - w * term).abs() <= 1e-12 * full.value.abs().max(1.0), "{} vs {}", lhs, w * term);
    }
}
