use lrdq::experiments::{
    band_constants, bk_general_range, check_nu, limit_scale, quantile_confidence_band,
    reduction_p_exponent, require_csr, run_bk_general_experiment, run_bk_uniform_experiment,
    run_coverage_experiment, run_experiment, run_lil_tracker, run_reduction_experiment,
    run_reduction_p2_experiment, run_subordinated_comparison, run_trimmed_mean_test,
    subordination_ratio, sup_abs_fprime, trimmed_sum, weak_limit_cdf, ExperimentConfig, Model,
    SubordinationTarget, TrimRule, EXPERIMENTS, LIL_BRACKET,
};
use lrdq::marginals::{ConditionFlags, Exponential, Gaussian, Logistic, Marginal, TailExponents};
use lrdq::processes::{c_beta_p, SupRange, YGrid};
use lrdq::stats::{ks_distance, sign_test_p};
use lrdq::Error;
use proptest::prelude::*;

fn cfg(n_grid: &[usize], reps: usize) -> ExperimentConfig {
    ExperimentConfig {
        n_grid: n_grid.to_vec(),
        replications: reps,
        ..ExperimentConfig::default()
    }
}

fn check<'a>(
    report: &'a lrdq::experiments::ExperimentReport,
    name: &str,
) -> &'a lrdq::experiments::Check {
    report
        .checks
        .iter()
        .find(|c| c.name == name)
        .unwrap_or_else(|| panic!("no check '{name}'"))
}

/// Brute-force KS distance: largest gap between the empirical CDF (both one-sided
/// limits) and `cdf` over every sample point.
fn ks_oracle(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sample.len() as f64;
    let mut d = 0.0f64;
    for &x in sample {
        let le = sample.iter().filter(|&&s| s <= x).count() as f64 / n;
        let lt = sample.iter().filter(|&&s| s < x).count() as f64 / n;
        let f = cdf(x);
        d = d.max((le - f).abs()).max((lt - f).abs());
    }
    d
}

#[derive(Debug)]
struct NoCsr(Gaussian);

impl Marginal for NoCsr {
    fn name(&self) -> String {
        "gaussian without CsR".into()
    }
    fn cdf(&self, x: f64) -> f64 {
        self.0.cdf(x)
    }
    fn pdf(&self, x: f64) -> f64 {
        self.0.pdf(x)
    }
    fn quantile(&self, y: f64) -> f64 {
        self.0.quantile(y)
    }
    fn pdf_derivative(&self, x: f64, order: u32) -> f64 {
        self.0.pdf_derivative(x, order)
    }
    fn tail_exponents(&self) -> TailExponents {
        self.0.tail_exponents()
    }
    fn flags(&self) -> ConditionFlags {
        ConditionFlags {
            csr: [true, true, false, true],
            ..self.0.flags()
        }
    }
}

#[test]
fn registry_lists_every_experiment() {
    assert_eq!(EXPERIMENTS.len(), 13);
    assert!(matches!(
        run_experiment("nope", &ExperimentConfig::default()),
        Err(Error::Config(_))
    ));
    let r = run_experiment(
        "cbp",
        &ExperimentConfig {
            beta: 0.75,
            ..Default::default()
        },
    )
    .unwrap();
    assert!(r.passed());
}

#[test]
fn reduction_statistic_and_replication_stability() {
    let small = run_reduction_experiment(&cfg(&[1024, 2048], 60)).unwrap();
    let large = run_reduction_experiment(&cfg(&[1024, 2048], 120)).unwrap();
    for n in [1024, 2048] {
        assert!(small.rep_values("sup_dev", n).iter().all(|&v| v >= 0.0));
        let lo = small.aggregate("sup_dev", Some(n), "median_ci_lo").unwrap();
        let hi = small.aggregate("sup_dev", Some(n), "median_ci_hi").unwrap();
        let m = large.aggregate("sup_dev", Some(n), "median").unwrap();
        assert!(
            lo <= m && m <= hi,
            "median {m} outside [{lo}, {hi}] at n = {n}"
        );
        // the first reps are shared between the two runs
        assert_eq!(
            small.rep_values("sup_dev", n)[..60],
            large.rep_values("sup_dev", n)[..60]
        );
    }
}

#[test]
fn order_two_reduction_slope() {
    let c = ExperimentConfig {
        n_grid: (12..=17).map(|j| 1usize << j).collect(),
        replications: 100,
        ..ExperimentConfig::default()
    };
    let r = run_reduction_p2_experiment(&c).unwrap();
    let expected = reduction_p_exponent(0.65, 2);
    assert!((expected + 1.0).abs() < 1e-15);
    let fit = &r.slope("sup_dev_p").unwrap().fit;
    assert!(
        (fit.slope - expected).abs() <= 0.1,
        "slope {} vs {expected}",
        fit.slope
    );
    for &n in &c.n_grid {
        assert!(r.rep_values("sup_dev_p", n).iter().all(|&v| v >= 0.0));
        assert!(r.aggregate("order_difference_gap", Some(n), "max").unwrap() >= -1e-12);
    }
    assert!(check(&r, "order-p reduction slope").passed);
}

#[test]
fn bk_uniform_limit_scale_and_signs() {
    let g = Gaussian::standard();
    assert!(matches!(
        limit_scale(&g, 0.5),
        Err(Error::DegenerateTarget(_))
    ));
    let a = limit_scale(&g, 0.3).unwrap();
    assert!((a - 0.18233).abs() < 1e-5);

    let c = ExperimentConfig {
        n_grid: vec![1 << 15],
        replications: 300,
        y0: 0.3,
        ..ExperimentConfig::default()
    };
    let r = run_bk_uniform_experiment(&c).unwrap();
    let agree = r
        .aggregate("sign_agreement", Some(1 << 15), "value")
        .unwrap();
    // calibrated: local i.i.d.-type fluctuations keep this below the nominal 0.95 at n = 2^15
    assert!(agree >= 0.85, "sign agreement {agree}");
    let y0_half = ExperimentConfig { y0: 0.5, ..c };
    assert!(matches!(
        run_bk_uniform_experiment(&y0_half),
        Err(Error::DegenerateTarget(_))
    ));
}

#[test]
fn bk_general_range_and_csr() {
    assert_eq!(bk_general_range(1.0, 1.0, 0.1).unwrap(), SupRange::Full);
    assert_eq!(
        bk_general_range(1.2, 1.0, 0.1).unwrap(),
        SupRange::DeltaTrim {
            c0: 1.0,
            delta_n: 0.1
        }
    );
    assert!(matches!(
        bk_general_range(1.2, 1.0, 0.5),
        Err(Error::EmptyRange(_))
    ));
    assert!(require_csr(&Gaussian::standard()).is_ok());
    assert!(require_csr(&Exponential).is_ok());
    assert!(matches!(
        require_csr(&NoCsr(Gaussian::standard())),
        Err(Error::ConditionUnmet(_))
    ));

    let r = run_bk_general_experiment(&cfg(&[512, 1024], 50)).unwrap();
    for n in [512, 1024] {
        assert!(r
            .rep_values("sup_dev", n)
            .iter()
            .all(|&v| v >= 0.0 && v.is_finite()));
        assert_eq!(r.rep_values("ratio", n).len(), 50);
    }
}

#[test]
fn lil_tracker_bracket() {
    let c = ExperimentConfig {
        lil_max_log2: 24,
        ..ExperimentConfig::default()
    };
    let r = run_lil_tracker(&c).unwrap();
    assert!(check(&r, "LIL bracket for M").passed);
    let c1 = r.aggregate("c_beta_1", None, "value").unwrap();
    assert!((c1 - c_beta_p(0.65, 1).unwrap()).abs() < 1e-12);
    let run = r.aggregate("M_running_max_over_c", None, "value").unwrap();
    assert!(LIL_BRACKET.0 <= run && run <= LIL_BRACKET.1);
    for j in 8..=24 {
        let m = r.rep_values("M", 1 << j);
        assert_eq!(m.len(), 1);
        assert!(m[0] >= 0.0);
    }
    let s = sup_abs_fprime(&Gaussian::standard()).unwrap();
    assert!((s - (-0.5f64).exp() / (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-6);
}

#[test]
fn band_constants_and_algebra() {
    let (c, z) = band_constants(0.9, 0.05).unwrap();
    assert!((c - 0.28717).abs() < 1e-5);
    assert!((z - 1.95996).abs() < 1e-5);
    assert_eq!(band_constants(0.9, 1.0).unwrap().1, 0.0);
    assert!(band_constants(0.9, 0.0).is_err());

    let g = Gaussian::standard();
    assert!(check_nu(0.9, 0.65, &g).is_ok());
    assert!(matches!(
        check_nu(0.8, 0.65, &g),
        Err(Error::BandExponent { .. })
    ));
    assert!(check_nu(1.6, 0.8, &g).is_err());

    let x: Vec<f64> = (0..100).map(|i| ((i * 37) % 100) as f64 / 10.0).collect();
    let grid = YGrid::uniform(99).unwrap();
    let sigma = 3.0;
    let band = quantile_confidence_band(&x, sigma, &g, 0.65, 0.9, 0.05, &grid).unwrap();
    for i in 0..band.y.len() {
        let y = band.y[i];
        let half = sigma / 100.0 * c * z * (y * (1.0 - y)).powf(-0.9);
        assert!((band.upper[i] - band.center[i] - half).abs() < 1e-12);
        assert!((band.center[i] - band.lower[i] - half).abs() < 1e-12);
        assert!(y > 0.01 && y < 0.99);
    }
}

#[test]
fn coverage_behaviour() {
    let base = ExperimentConfig {
        n_grid: vec![1024],
        replications: 100,
        ..ExperimentConfig::default()
    };
    let zero_width = run_coverage_experiment(&ExperimentConfig {
        alpha_level: 1.0,
        ..base.clone()
    })
    .unwrap();
    assert!(
        zero_width
            .aggregate("coverage", Some(1024), "value")
            .unwrap()
            <= 0.01
    );
    let cov: Vec<f64> = [0.86, 0.9, 1.0]
        .iter()
        .map(|&nu| {
            let r = run_coverage_experiment(&ExperimentConfig { nu, ..base.clone() }).unwrap();
            r.aggregate("coverage", Some(1024), "value").unwrap()
        })
        .collect();
    assert!(cov.windows(2).all(|w| w[1] >= w[0]), "{cov:?}");
    assert!(matches!(
        run_coverage_experiment(&ExperimentConfig { nu: 0.5, ..base }),
        Err(Error::BandExponent { .. })
    ));
}

#[test]
fn trimming() {
    let sorted = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0];
    assert_eq!(trimmed_sum(&sorted, 0.0).unwrap(), 55.0);
    assert_eq!(
        trimmed_sum(&sorted, 0.2).unwrap(),
        2.0 + 3.0 + 4.0 + 5.0 + 6.0 + 7.0 + 8.0
    );
    assert!(matches!(trimmed_sum(&sorted, 0.5), Err(Error::OverTrim(_))));
    let over = ExperimentConfig {
        trim: TrimRule::Fixed(0.5),
        ..cfg(&[1024], 50)
    };
    assert!(matches!(
        run_trimmed_mean_test(&over),
        Err(Error::OverTrim(_))
    ));
    let r = run_trimmed_mean_test(&cfg(&[1024, 4096, 16384], 100)).unwrap();
    assert!(check(&r, "negligible trimming").passed);
}

#[test]
fn subordination() {
    let e = Exponential;
    let ratios: Vec<f64> = (1..=40)
        .map(|j| subordination_ratio(&e, 2f64.powi(-j)))
        .collect();
    assert!(
        ratios.windows(2).all(|w| w[1] < w[0]),
        "ratio shrinks toward the lower tail"
    );
    let upper: Vec<f64> = (1..=40)
        .map(|j| subordination_ratio(&e, 1.0 - 2f64.powi(-j)))
        .collect();
    assert!(
        upper.windows(2).all(|w| w[1] > w[0]),
        "ratio grows in the upper tail"
    );
    let l = Logistic::new(1.0).unwrap();
    assert!(subordination_ratio(&l, 0.5) > 1.0);
    let id = subordination_ratio(&Gaussian::standard(), 0.2);
    assert!((id - 1.0).abs() < 1e-12);

    let c = ExperimentConfig {
        n_grid: vec![1 << 12],
        replications: 50,
        target: SubordinationTarget::Logistic,
        ..ExperimentConfig::default()
    };
    let r = run_subordinated_comparison(&c).unwrap();
    assert!(r.aggregate("ratio_max", None, "depth8").is_some());
}

#[test]
fn ks_matches_brute_force() {
    let m = Model::for_experiment(&cfg(&[128], 1), 128, &[]).unwrap();
    for rep in 0..5 {
        let path = m.path(11, 0, rep);
        let x = &path.x[..100];
        let g = m.marginal.as_ref();
        let fast = ks_distance(x, |t| g.cdf(t));
        assert!((fast - ks_oracle(x, |t| g.cdf(t))).abs() < 1e-15);
    }
    let tied = [0.0, 0.0, 0.0, 1.0];
    assert!(
        (ks_distance(&tied, |t| t.clamp(0.0, 1.0)) - ks_oracle(&tied, |t| t.clamp(0.0, 1.0))).abs()
            < 1e-15
    );
    assert!((sign_test_p(5, 5) - 1.0).abs() < 1e-12);
}

#[test]
fn weak_limit_cdf_validity() {
    for a in [0.18233, -0.4] {
        let mut prev = 0.0;
        for j in -200..=200 {
            let t = j as f64 / 50.0;
            let f = weak_limit_cdf(t, a).unwrap();
            assert!((0.0..=1.0).contains(&f));
            assert!(f >= prev);
            prev = f;
        }
    }
    assert_eq!(weak_limit_cdf(-1.0, 0.5).unwrap(), 0.0);
    assert_eq!(weak_limit_cdf(1.0, -0.5).unwrap(), 1.0);
    assert!(matches!(
        weak_limit_cdf(1.0, 0.0),
        Err(Error::DegenerateTarget(_))
    ));
}

proptest! {
    #[test]
    fn prop_ks_oracle(xs in prop::collection::vec(-3.0f64..3.0, 1..100)) {
        let g = Gaussian::standard();
        let fast = ks_distance(&xs, |t| g.cdf(t));
        prop_assert!((fast - ks_oracle(&xs, |t| g.cdf(t))).abs() < 1e-14);
    }

    #[test]
    fn prop_band_constants(nu in 0.01f64..3.0, alpha in 0.001f64..1.0) {
        let (c, z) = band_constants(nu, alpha).unwrap();
        prop_assert!(c > 0.0 && c < 1.0);
        prop_assert!(z >= 0.0);
    }
}
