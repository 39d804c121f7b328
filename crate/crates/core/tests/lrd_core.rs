use lrdq::lrd::{
    autocovariance, make_coefficients, make_coefficients_meeting_eps, partial_sum_y, sample_path,
    sigma_np, tail_truncation_index, CoefficientSpec, ConvolutionMethod, InnovationSpec, LrdPath,
    PathGenerator, SecondOrder, SigmaMode, SlowlyVarying,
};
use lrdq::numerics::fsum;
use lrdq::Error;
use proptest::prelude::*;
use statrs::function::gamma::ln_gamma;

fn spec(beta: f64) -> CoefficientSpec {
    CoefficientSpec::new(beta).unwrap()
}

fn direct_convolution(c: &[f64], e: &[f64]) -> Vec<f64> {
    let k = c.len() - 1;
    (0..e.len() - k)
        .map(|i| (0..=k).map(|j| c[j] * e[i + k - j]).sum())
        .collect()
}

#[test]
fn coefficient_examples() {
    let c = make_coefficients(&spec(0.75), 4).unwrap();
    assert_eq!(c[1], 1.0);
    assert!((c[4] - 0.353553).abs() < 1e-6);
    assert_eq!(c[0], 1.0);
    for k in [0, 1, 10, 1000] {
        let c = make_coefficients(&spec(0.7).normalized(true), k).unwrap();
        assert!(
            (fsum(c.iter().map(|x| x * x)) - 1.0).abs() < 1e-12,
            "K = {k}"
        );
    }
}

#[test]
fn beta_out_of_range_is_rejected() {
    for beta in [0.5, 1.0, 1.2, 0.3] {
        assert!(matches!(
            CoefficientSpec::new(beta),
            Err(Error::BetaOutOfRange(_))
        ));
    }
    let bad_eps = spec(0.7).with_truncation_eps(0.0);
    assert!(bad_eps.validate().is_err());
}

#[test]
fn regular_variation_ratio() {
    let k = 1u64 << 10;
    let c = make_coefficients(&spec(0.7), 2 * k).unwrap();
    assert!((c[2 * k as usize] / c[k as usize] - 2f64.powf(-0.7)).abs() < 1e-6);
    let lp = spec(0.7).with_slowly_varying(SlowlyVarying::LogPower { a: 1.0 });
    let c = make_coefficients(&lp, 1 << 20).unwrap();
    let ratio = |k: usize| c[k] / ((k as f64).powf(-0.7) * ((k as f64) + std::f64::consts::E).ln());
    assert!((ratio(1 << 20) - 1.0).abs() < 1e-12);
}

#[test]
fn truncation_index_meets_tolerance_by_direct_summation() {
    let s = spec(0.75).with_truncation_eps(1e-4);
    let k = tail_truncation_index(&s);
    // total = c_0^2 + zeta(1.5)
    let total = 1.0 + 2.612_375_348_685_488;
    let head = fsum((0..=k).map(|j| if j == 0 { 1.0 } else { (j as f64).powf(-1.5) }));
    assert!(
        total - head <= 1e-4 * total,
        "K = {k}, tail {}",
        total - head
    );
    let fast = tail_truncation_index(&spec(0.95).with_truncation_eps(1e-4));
    let slow = tail_truncation_index(&spec(0.55).with_truncation_eps(1e-4));
    assert!(fast < slow);
    assert_eq!(
        tail_truncation_index(&spec(0.7).with_truncation_eps(1.0)),
        0
    );
    assert!(matches!(
        make_coefficients_meeting_eps(&s, k / 2),
        Err(Error::TruncationTooShort { .. })
    ));
}

#[test]
fn path_examples() {
    let zero = LrdPath::from_innovations(
        vec![1.0, 0.6, 0.4],
        vec![0.0; 10],
        spec(0.7),
        ConvolutionMethod::Fft,
    )
    .unwrap();
    assert_eq!(zero.n(), 8);
    assert!(zero.x.iter().all(|&x| x == 0.0));
    assert_eq!(partial_sum_y(&zero, 1).unwrap(), 0.0);
    assert_eq!(partial_sum_y(&zero, 2).unwrap(), 0.0);

    let e = vec![0.3, -1.2, 2.0, 0.7, -0.4];
    let p = LrdPath::from_innovations(
        vec![1.0, 0.5],
        e.clone(),
        spec(0.7),
        ConvolutionMethod::Direct,
    )
    .unwrap();
    let expected: Vec<f64> = (1..5).map(|i| e[i] + 0.5 * e[i - 1]).collect();
    assert_eq!(p.x, expected);

    let s = spec(0.7).with_max_lag(Some(100));
    let a = sample_path(&s, &InnovationSpec::standard_normal(), 64, 5).unwrap();
    let b = sample_path(&s, &InnovationSpec::standard_normal(), 64, 5).unwrap();
    assert!(a
        .x
        .iter()
        .zip(&b.x)
        .all(|(u, v)| u.to_bits() == v.to_bits()));
    assert_eq!(a.innovations.len(), 64 + 100);
}

#[test]
fn memory_budget_is_enforced() {
    let s = spec(0.7).with_max_lag(Some(1000));
    let r = PathGenerator::with_options(
        s,
        InnovationSpec::standard_normal(),
        100,
        500,
        ConvolutionMethod::Auto,
    );
    assert!(matches!(r, Err(Error::MemoryBudget { .. })));
}

#[test]
fn partial_sum_examples() {
    let p = LrdPath::from_innovations(
        vec![1.0, 0.5],
        vec![2.0, 1.0],
        spec(0.7),
        ConvolutionMethod::Direct,
    )
    .unwrap();
    assert_eq!(partial_sum_y(&p, 0).unwrap(), 1.0);
    assert_eq!(partial_sum_y(&p, 2).unwrap(), 1.0);
    assert!(matches!(partial_sum_y(&p, 3), Err(Error::Unsupported(_))));
}

#[test]
fn autocovariance_examples() {
    let s = spec(0.7).with_max_lag(Some(50));
    let c = make_coefficients(&s, 50).unwrap();
    assert!(
        (autocovariance(&s, 0, 2.0).unwrap() - 2.0 * fsum(c.iter().map(|x| x * x))).abs() < 1e-12
    );
    let one = spec(0.7)
        .with_max_lag(Some(1))
        .with_slowly_varying(SlowlyVarying::Constant { scale: 0.5 });
    assert!((autocovariance(&one, 1, 1.0).unwrap() - 0.25).abs() < 1e-15);
    let lag3: f64 = (0..=47).map(|m| c[m] * c[m + 3]).sum();
    assert!((autocovariance(&s, 3, 1.0).unwrap() - lag3).abs() < 1e-12);
}

#[test]
fn sigma_examples() {
    let s = spec(0.7).with_max_lag(Some(200));
    let so = SecondOrder::from_spec(s, 1.0).unwrap();
    let (r0, r1) = (so.rho(0), so.rho(1));
    assert!((sigma_np(&s, 1, 1, SigmaMode::Exact, 1.0).unwrap() - r0.sqrt()).abs() < 1e-12);
    assert!(
        (sigma_np(&s, 2, 1, SigmaMode::Exact, 1.0).unwrap() - (2.0 * r0 + 2.0 * r1).sqrt()).abs()
            < 1e-12
    );
    assert!(matches!(
        sigma_np(&s, 8, 2, SigmaMode::Exact, 1.0),
        Err(Error::Unsupported(_))
    ));
    // p >= 1/(2 beta - 1) = 2.5
    assert!(matches!(
        sigma_np(&s, 8, 3, SigmaMode::Asymptotic, 1.0),
        Err(Error::OrderDomain { .. })
    ));
    let a = sigma_np(&s, 1 << 12, 2, SigmaMode::Asymptotic, 1.0).unwrap();
    assert!((a - 4096f64.powf(1.0 - 2.0 * 0.2)).abs() < 1e-9 * a);
}

#[test]
fn variance_identity_and_scaling() {
    let so = SecondOrder::from_spec(spec(0.7).with_max_lag(Some(3000)), 1.0).unwrap();
    for n in [1u64, 2, 17, 1000, 4096] {
        let a = so.sigma2_n1(n);
        let b = so.sigma2_n1_from_rho(n);
        assert!((a - b).abs() <= 1e-10 * a, "n = {n}: {a} vs {b}");
    }
    let so = SecondOrder::from_spec(spec(0.7), 1.0).unwrap();
    let xs: Vec<f64> = (10..=16)
        .map(|j| j as f64 * std::f64::consts::LN_2)
        .collect();
    let ys: Vec<f64> = (10..=16).map(|j| so.sigma2_n1(1 << j).ln()).collect();
    let fit = lrdq::stats::ols(&xs, &ys);
    assert!((fit.slope - 1.6).abs() <= 0.05, "slope {}", fit.slope);
}

#[test]
fn exact_variance_matches_monte_carlo() {
    let n = 256;
    let s = spec(0.7).with_max_lag(Some(4096));
    let generator = PathGenerator::new(s, InnovationSpec::standard_normal(), n).unwrap();
    let reps = 2000;
    let sums: Vec<f64> = (0..reps)
        .map(|r| fsum(generator.generate(77, r).x))
        .collect();
    let mean = sums.iter().sum::<f64>() / reps as f64;
    let var = sums.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
    let exact = SecondOrder::new(generator.sequence().clone(), 1.0).sigma2_n1(n as u64);
    let se = exact * (2.0 / (reps as f64 - 1.0)).sqrt();
    assert!(
        (var - exact).abs() <= 3.0 * se,
        "MC {var} vs exact {exact} (se {se})"
    );
}

#[test]
fn covariance_trend_towards_beta_function() {
    for beta in [0.6, 0.7, 0.8] {
        let so = SecondOrder::from_spec(spec(beta).with_truncation_eps(1e-6), 1.0).unwrap();
        let b = (ln_gamma(2.0 * beta - 1.0) + ln_gamma(1.0 - beta) - ln_gamma(beta)).exp();
        assert!((so.covariance_limit() - b).abs() < 1e-10 * b);
        let gaps: Vec<f64> = (6..=12)
            .map(|j| (so.normalized_rho(1 << j) - b).abs())
            .collect();
        assert!(
            gaps.windows(2).all(|w| w[1] < w[0]),
            "beta {beta}: {gaps:?}"
        );
    }
}

#[test]
fn fft_and_direct_agree() {
    for (n, k) in [(1usize, 1usize), (64, 32), (1000, 60), (256, 255)] {
        let c = make_coefficients(&spec(0.65).with_max_lag(Some(k as u64)), k as u64).unwrap();
        let g = PathGenerator::new(
            spec(0.65).with_max_lag(Some(k as u64)),
            InnovationSpec::standard_normal(),
            n,
        )
        .unwrap();
        let e = g.generate(3, 0).innovations;
        let direct = direct_convolution(&c, &e);
        let fft = LrdPath::from_innovations(c, e, spec(0.65), ConvolutionMethod::Fft)
            .unwrap()
            .x;
        let scale = direct.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (a, b) in fft.iter().zip(&direct) {
            assert!((a - b).abs() <= 1e-10 * scale);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn prop_fft_matches_direct(n in 1usize..300, k in 0usize..200, seed in 0u64..1000, beta in 0.51f64..0.99) {
        prop_assume!(n * k <= 1 << 16);
        let s = spec(beta).with_max_lag(Some(k as u64));
        let c = make_coefficients(&s, k as u64).unwrap();
        let e = PathGenerator::new(s, InnovationSpec::double_exponential(), n).unwrap().generate(seed, 1).innovations;
        let direct = direct_convolution(&c, &e);
        let fft = LrdPath::from_innovations(c, e, s, ConvolutionMethod::Fft).unwrap().x;
        let scale = direct.iter().fold(1e-300f64, |m, v| m.max(v.abs()));
        for (a, b) in fft.iter().zip(&direct) {
            prop_assert!((a - b).abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn prop_y2_matches_pairs(n in 1usize..64, k in 1u64..32, seed in 0u64..10_000) {
        let s = spec(0.7).with_max_lag(Some(k));
        let g = PathGenerator::new(s, InnovationSpec::standard_normal(), n).unwrap();
        let p = g.generate(seed, 0);
        let (c, e, k) = (&p.coefficients, &p.innovations, k as usize);
        let mut brute = 0.0;
        for i in 0..n {
            for j1 in 0..=k {
                for j2 in j1 + 1..=k {
                    brute += c[j1] * c[j2] * e[i + k - j1] * e[i + k - j2];
                }
            }
        }
        let fast = g.y2(&p);
        prop_assert!((fast - brute).abs() <= 1e-9 * brute.abs().max(1e-12));
    }

    #[test]
    fn prop_normalized_unit_sum(beta in 0.51f64..0.99, k in 0u64..5000) {
        let c = make_coefficients(&spec(beta).normalized(true), k).unwrap();
        prop_assert!((fsum(c.iter().map(|x| x * x)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn prop_sigma_identity(beta in 0.51f64..0.99, n in 1u64..3000, k in 1u64..3000) {
        let so = SecondOrder::from_spec(spec(beta).with_max_lag(Some(k)), 1.0).unwrap();
        let a = so.sigma2_n1(n);
        prop_assert!((a - so.sigma2_n1_from_rho(n)).abs() <= 1e-9 * a);
    }
}
