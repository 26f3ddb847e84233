//! Solver examples and cross-method identities.

use conformable::oracle::compare_values;
use conformable::quad::gauss_kronrod;
use conformable::solvers::{
    heat_kernel_fbm, kernel_series_pd, solve_fourier, solve_mc_free, solve_mc_killed, solve_spectral_interval,
    FreeProcess, IntervalSpectrum, SpectralBasis, DEFAULT_MODES,
};
use conformable::{
    conformable_derivative_limit, EpsSchedule, FbmSpec, FractionalOrder, GridField, IntervalDomain, LevySymbol,
    ScalarFunction,
};
use std::f64::consts::PI;

fn gauss_density(x: f64, var: f64) -> f64 {
    (-x * x / (2.0 * var)).exp() / (2.0 * PI * var).sqrt()
}

fn order(a: f64) -> FractionalOrder {
    FractionalOrder::new(a).unwrap()
}

#[test]
fn mc_gaussian_convolution() {
    let sym = LevySymbol::heat(1, 1.0).unwrap();
    let t = 0.5;
    let query = vec![vec![0.0], vec![0.7], vec![-1.5]];
    let f = |x: &[f64]| gauss_density(x[0], 1.0);
    let est = solve_mc_free(&f, FreeProcess::Levy(&sym), FractionalOrder::CLASSICAL, t, &query, 100_000, 4).unwrap();
    for (i, q) in query.iter().enumerate() {
        let want = gauss_density(q[0], 1.0 + 2.0 * t);
        assert!((est.mean[i] - want).abs() <= 3.0 * est.std_error[i], "x={} {} vs {want}", q[0], est.mean[i]);
    }
}

#[test]
fn mc_fbm_without_clock() {
    let spec = FbmSpec::new(0.25, 1).unwrap();
    let f = |x: &[f64]| (-x[0] * x[0] / 2.0).exp();
    // the order is ignored for fBm: marginal at physical time
    let est = solve_mc_free(&f, FreeProcess::Fbm(&spec), order(0.5), 4.0, &[vec![0.0]], 100_000, 5).unwrap();
    let want = 1.0 / 3f64.sqrt();
    assert!((est.mean[0] - want).abs() <= 3.0 * est.std_error[0]);
}

#[test]
fn fbm_marginal_matches_gaussian_symbol_on_clock() {
    // B^H(t) has the law of Brownian motion with Q = 2H run to t^(2H)/(2H)
    for h in [0.25, 0.4] {
        let spec = FbmSpec::new(h, 1).unwrap();
        let sym = LevySymbol::heat(1, h).unwrap();
        let f = |x: &[f64]| (x[0] - 0.3).cos() * (-0.1 * x[0] * x[0]).exp();
        let q = vec![vec![0.0], vec![1.0]];
        let t = 1.7;
        let a = solve_mc_free(&f, FreeProcess::Fbm(&spec), order(2.0 * h), t, &q, 100_000, 1).unwrap();
        let b = solve_mc_free(&f, FreeProcess::Levy(&sym), order(2.0 * h), t, &q, 100_000, 2).unwrap();
        for i in 0..2 {
            let se = a.std_error[i].hypot(b.std_error[i]);
            assert!((a.mean[i] - b.mean[i]).abs() <= 3.0 * se);
        }
    }
}

#[test]
fn mc_clock_equivalence() {
    let sym = LevySymbol::symmetric_stable(1, 0.7, 1.4).unwrap();
    let f = |x: &[f64]| 1.0 / (1.0 + x[0] * x[0]);
    let q = vec![vec![0.0], vec![2.0]];
    for a in [0.3, 0.5, 0.8] {
        let o = order(a);
        for t in [0.5, 1.0, 2.0] {
            let u = solve_mc_free(&f, FreeProcess::Levy(&sym), o, t, &q, 20_000, 9).unwrap();
            let v = solve_mc_free(&f, FreeProcess::Levy(&sym), FractionalOrder::CLASSICAL, o.clock(t), &q, 20_000, 9)
                .unwrap();
            for i in 0..2 {
                assert!((u.mean[i] - v.mean[i]).abs() <= 3.0 * u.std_error[i]);
            }
        }
    }
}

#[test]
fn killed_examples() {
    let domain = IntervalDomain::new(PI).unwrap();
    let o = order(0.5);
    let zero = solve_mc_killed(&|_| 0.0, &domain, o, 2.0, 1.0, 1.0, 1000, 1e-3, 1).unwrap();
    assert_eq!(zero.mean[0], 0.0);
    assert_eq!(zero.bias_budget, 0.0);

    let est = solve_mc_killed(&f64::sin, &domain, o, 2.0, 1.0, PI / 2.0, 20_000, 1e-3, 2).unwrap();
    let want = (-2f64).exp();
    assert!((est.mean[0] - want).abs() <= 3.0 * est.std_error[0] + est.bias_budget);

    // clock 25 >= 20 / lambda_1
    let late = solve_mc_killed(&f64::sin, &domain, FractionalOrder::CLASSICAL, 2.0, 25.0, PI / 2.0, 2000, 0.05, 3)
        .unwrap();
    assert!(late.mean[0].abs() <= 3.0 * late.std_error[0] + 1e-12);
    assert!(solve_mc_killed(&f64::sin, &domain, o, 2.0, 1.0, PI, 1000, 1e-3, 1).is_err());
    assert!(solve_mc_killed(&f64::sin, &domain, o, 2.0, 1.0, 1.0, 1000, 0.1, 1).is_err());
}

#[test]
fn fourier_identity_at_time_zero() {
    let f = GridField::sample_periodic_1d(-10.0, 10.0, 256, |x| gauss_density(x, 0.5) + 0.1 * x.sin()).unwrap();
    let sym = LevySymbol::symmetric_stable(1, 1.0, 1.5).unwrap();
    let u = solve_fourier(&f, &sym, order(0.5), 0.0).unwrap();
    let r = compare_values(&u.values, &f.values).unwrap();
    assert!(r.max_abs <= 1e-12);
}

#[test]
fn fourier_heat_kernel() {
    let f = GridField::sample_periodic_1d(-20.0, 20.0, 1024, |x| gauss_density(x, 0.5)).unwrap();
    let sym = LevySymbol::heat(1, 1.0).unwrap();
    let u = solve_fourier(&f, &sym, FractionalOrder::CLASSICAL, 0.25).unwrap();
    let want: Vec<f64> = u.points().iter().map(|p| gauss_density(p[0], 1.0)).collect();
    assert!(compare_values(&u.values, &want).unwrap().max_abs <= 1e-6);
    assert!((u.periodic_mass() - f.periodic_mass()).abs() <= 1e-8);
}

/// Wrapped Cauchy density of scale `gamma` on a period `w`.
fn wrapped_cauchy(x: f64, gamma: f64, w: f64) -> f64 {
    let a = 2.0 * PI * gamma / w;
    a.sinh() / (w * (a.cosh() - (2.0 * PI * x / w).cos()))
}

#[test]
fn fourier_cauchy_profile() {
    let (w, sigma) = (400.0, 0.1);
    let f = GridField::sample_periodic_1d(-w / 2.0, w / 2.0, 1 << 14, |x| gauss_density(x, sigma * sigma)).unwrap();
    let sym = LevySymbol::symmetric_stable(1, 1.0, 1.0).unwrap();
    let o = order(0.5);
    let u = solve_fourier(&f, &sym, o, 1.0).unwrap();
    let gamma = o.clock(1.0);
    assert_eq!(gamma, 2.0);
    let l1: f64 = u
        .points()
        .iter()
        .zip(&u.values)
        .map(|(p, v)| {
            let x = p[0];
            let exact = gauss_kronrod(
                |y| gauss_density(y, sigma * sigma) * wrapped_cauchy(x - y, gamma, w),
                -12.0 * sigma,
                12.0 * sigma,
                4,
                1e-14,
                1e-12,
            )
            .unwrap()
            .value;
            (v - exact).abs()
        })
        .sum::<f64>()
        * u.spacing[0];
    assert!(l1 <= 1e-3, "L1 {l1}");
}

#[test]
fn fourier_mass_and_clock_in_two_dimensions() {
    let f = GridField::sample_periodic_2d(-8.0, 8.0, 64, |x, y| gauss_density(x, 0.6) * gauss_density(y - 0.5, 0.4)).unwrap();
    let sym = LevySymbol::independent_stable(0.8, vec![1.5, 2.0]).unwrap();
    let o = order(0.3);
    let u = solve_fourier(&f, &sym, o, 1.3).unwrap();
    assert!((u.periodic_mass() - f.periodic_mass()).abs() <= 1e-8);
    let v = solve_fourier(&f, &sym, FractionalOrder::CLASSICAL, o.clock(1.3)).unwrap();
    assert_eq!(u, v);
}

#[test]
fn fourier_clock_equivalence_is_exact() {
    let f = GridField::sample_periodic_1d(-10.0, 10.0, 128, |x| (-x * x).exp()).unwrap();
    let sym = LevySymbol::symmetric_stable(1, 1.2, 0.8).unwrap();
    for a in [0.3, 0.5, 0.8] {
        for t in [0.5, 1.0, 2.0] {
            let o = order(a);
            let u = solve_fourier(&f, &sym, o, t).unwrap();
            let v = solve_fourier(&f, &sym, FractionalOrder::CLASSICAL, o.clock(t)).unwrap();
            assert_eq!(u.values, v.values);
        }
    }
}

#[test]
fn spectral_single_mode_and_boundary() {
    let l = 2.5;
    let f = |x: f64| (PI * x / l).sin();
    let basis = SpectralBasis::project(&f, l, DEFAULT_MODES).unwrap();
    let q: Vec<f64> = (0..=20).map(|i| i as f64 * l / 20.0).collect();
    let o = order(0.7);
    let sol = solve_spectral_interval(&f, &basis, o, 1.4, &q, 1e-12).unwrap();
    let decay = (-(PI / l).powi(2) * o.clock(1.4)).exp();
    for (x, v) in q.iter().zip(&sol.values) {
        assert!((v - f(*x) * decay).abs() <= 1e-12);
    }
    assert_eq!(sol.values[0], 0.0);
    assert_eq!(sol.values[20], 0.0);
    assert!(solve_spectral_interval(&f, &basis, o, 1.0, &[l + 0.1], 1e-12).is_err());
}

#[test]
fn spectral_parabola() {
    let f = |x: f64| x * (PI - x);
    let basis = SpectralBasis::project(&f, PI, DEFAULT_MODES).unwrap();
    // independent coefficients by adaptive quadrature, 50 terms
    let oracle: f64 = (1..=50)
        .map(|n| {
            let b = 2.0 / PI
                * gauss_kronrod(|y| f(y) * (n as f64 * y).sin(), 0.0, PI, 8, 1e-14, 1e-14)
                    .unwrap()
                    .value;
            b * (n as f64 * PI / 2.0).sin() * (-(n * n) as f64 * 2.0).exp()
        })
        .sum();
    let closed: f64 = (1..=99)
        .step_by(2)
        .map(|n| {
            let n = n as f64;
            8.0 / (PI * n.powi(3)) * (n * PI / 2.0).sin() * (-n * n * 2.0).exp()
        })
        .sum();
    assert!((oracle - closed).abs() <= 1e-12);
    let sol = solve_spectral_interval(&f, &basis, order(0.5), 1.0, &[PI / 2.0], 1e-12).unwrap();
    assert!((sol.values[0] - oracle).abs() <= 1e-12, "{} vs {oracle}", sol.values[0]);
}

#[test]
fn spectral_reconstruction_at_small_time() {
    let f = |x: f64| x * x * (1.0 - x);
    let basis = SpectralBasis::project(&f, 1.0, DEFAULT_MODES).unwrap();
    let sol = solve_spectral_interval(&f, &basis, FractionalOrder::CLASSICAL, 1e-7, &[0.2, 0.5, 0.8], 1e-9).unwrap();
    for (x, v) in [0.2, 0.5, 0.8].iter().zip(&sol.values) {
        assert!((v - f(*x)).abs() < 1e-4);
    }
    let at_zero = solve_spectral_interval(&f, &basis, order(0.4), 0.0, &[0.0, 0.3, 1.0], 1e-9).unwrap();
    assert_eq!(at_zero.values, vec![0.0, f(0.3), 0.0]);
}

#[test]
fn spectral_mode_doubling_and_truncation_flag() {
    let f = |x: f64| if (0.3..0.6).contains(&x) { 1.0 } else { 0.0 };
    let basis = SpectralBasis::project(&f, 1.0, 16).unwrap();
    let sol = solve_spectral_interval(&f, &basis, FractionalOrder::CLASSICAL, 1e-3, &[0.45], 1e-10).unwrap();
    assert!(sol.n_modes > 16 && !sol.truncated);
    assert!(sol.tail_bound <= 1e-10);
    let rough = solve_spectral_interval(&f, &basis, FractionalOrder::CLASSICAL, 1e-9, &[0.45], 1e-12).unwrap();
    assert!(rough.truncated && rough.n_modes == conformable::solvers::MAX_MODES);
}

#[test]
fn spectral_clock_equivalence_and_maximum_principle() {
    let f = |x: f64| (3.0 * x).sin().abs() * x * (2.0 - x);
    let basis = SpectralBasis::project(&f, 2.0, DEFAULT_MODES).unwrap();
    let q: Vec<f64> = (0..=40).map(|i| i as f64 / 20.0).collect();
    let fmax = q.iter().map(|x| f(*x)).fold(0.0, f64::max);
    for a in [0.3, 0.5, 0.8] {
        for t in [0.5, 1.0, 2.0] {
            let o = order(a);
            let u = solve_spectral_interval(&f, &basis, o, t, &q, 1e-10).unwrap();
            let v = solve_spectral_interval(&f, &basis, FractionalOrder::CLASSICAL, o.clock(t), &q, 1e-10).unwrap();
            assert_eq!(u.values, v.values);
            assert!(u.values.iter().all(|v| *v >= -1e-8 && *v <= fmax + 1e-8));
        }
    }
}

#[test]
fn conformable_pde_residual() {
    let l = PI;
    let f = |x: f64| x.sin();
    let basis = SpectralBasis::project(&f, l, 32).unwrap();
    for a in [0.4, 0.9] {
        let o = order(a);
        let x = 1.1;
        let b = basis.clone();
        let u = ScalarFunction::new(move |t| {
            solve_spectral_interval(&f64::sin, &b, o, t, &[x], 1e-12).unwrap().values[0]
        });
        for t in [0.5, 1.5] {
            let d = conformable_derivative_limit(&u, o, t, &EpsSchedule::default()).unwrap();
            let rhs = -u.eval(t);
            assert!((d.value - rhs).abs() <= 10.0 * d.error.max(1e-9), "{} vs {rhs}", d.value);
        }
    }
}

#[test]
fn kernel_fbm_examples_and_mass() {
    let q = FbmSpec::new(0.25, 1).unwrap();
    let v = heat_kernel_fbm(&q, 4.0, &[1.0], &[1.0 + 2f64.sqrt()]).unwrap();
    assert!((v - (4.0 * PI).powf(-0.5) * (-0.5f64).exp()).abs() < 1e-15);
    for (h, t) in [(0.2, 0.5), (0.45, 3.0)] {
        let s1 = FbmSpec::new(h, 1).unwrap();
        let g = GridField::sample_1d(-30.0, 30.0, 6001, |x| heat_kernel_fbm(&s1, t, &[x], &[0.0]).unwrap()).unwrap();
        assert!((g.mass() - 1.0).abs() <= 1e-6);
        let s2 = FbmSpec::new(h, 2).unwrap();
        let g = GridField::sample_periodic_2d(-15.0, 15.0, 300, |x, y| heat_kernel_fbm(&s2, t, &[x, y], &[0.2, 0.0]).unwrap())
            .unwrap();
        assert!((g.mass() - 1.0).abs() <= 1e-6);
    }
}

/// Central difference with one Richardson step.
fn d1(g: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    let c = |h: f64| (g(x + h) - g(x - h)) / (2.0 * h);
    (4.0 * c(h / 2.0) - c(h)) / 3.0
}

fn d2(g: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    let c = |h: f64| (g(x + h) - 2.0 * g(x) + g(x - h)) / (h * h);
    (4.0 * c(h / 2.0) - c(h)) / 3.0
}

#[test]
fn fbm_kernel_identity() {
    let cases = [(0.1, 0.7, 0.3), (0.25, 2.0, -1.1), (0.4, 1.3, 0.0), (0.49, 0.4, 0.8)];
    for (h, t, r) in cases {
        let spec = FbmSpec::new(h, 1).unwrap();
        let p = |t: f64, z: f64| heat_kernel_fbm(&spec, t, &[z], &[0.0]).unwrap();
        let lhs = d1(|s| p(s, r), t, 1e-3 * t);
        let rhs = h * t.powf(2.0 * h - 1.0) * d2(|z| p(t, z), r, 1e-2 * t.powf(h));
        assert!((lhs - rhs).abs() <= 1e-4 * lhs.abs().max(rhs.abs()), "H={h} t={t}");
    }
}

#[test]
fn killed_kernel_series() {
    let sp = IntervalSpectrum::new(1.5, 128).unwrap();
    let t = 0.05;
    let a = kernel_series_pd(&sp, t, 0.3, 1.1).unwrap();
    let b = kernel_series_pd(&sp, t, 1.1, 0.3).unwrap();
    assert_eq!(a.value, b.value);
    assert!(a.error < 1e-12);

    let x = 0.4;
    let lam1 = sp.eigenvalue(1);
    let repro = gauss_kronrod(
        |y| kernel_series_pd(&sp, t, x, y).unwrap().value * sp.eigenfunction(1, y),
        0.0,
        1.5,
        16,
        1e-13,
        1e-12,
    )
    .unwrap();
    let want = (-lam1 * t).exp() * sp.eigenfunction(1, x);
    assert!((repro.value - want).abs() <= 1e-8);

    for t in [0.2, 0.5, 1.0] {
        let (x, y) = (0.5, 0.9);
        let full = kernel_series_pd(&sp, t, x, y).unwrap().value;
        let lead = 2.0 / 1.5 * (-lam1 * t).exp() * sp.eigenfunction(1, x) * sp.eigenfunction(1, y);
        let bound = (-(sp.eigenvalue(2) - lam1) * t).exp();
        assert!(((full - lead) / lead).abs() <= bound);
    }
    assert!(kernel_series_pd(&sp, 0.0, 0.1, 0.2).is_err());
}
