use lrdq::lrd::{CoefficientSpec, InnovationSpec};
use lrdq::marginals::{
    condition_report, oracle_marginal_from_simulation, Exponential, Gaussian, Logistic, Marginal,
    OracleMarginal, SmoothedPareto,
};
use lrdq::numerics::{integrate, integrate_unit};
use proptest::prelude::*;
use std::sync::OnceLock;

fn analytic_models() -> Vec<Box<dyn Marginal>> {
    vec![
        Box::new(Gaussian::standard()),
        Box::new(Gaussian::new(2.5).unwrap()),
        Box::new(Logistic::new(1.0).unwrap()),
        Box::new(Logistic::new(0.3).unwrap()),
        Box::new(SmoothedPareto::new(6.0, 1.0).unwrap()),
        Box::new(SmoothedPareto::new(4.5, 0.5).unwrap()),
    ]
}

fn tail_grid(jmax: i32) -> Vec<f64> {
    (1..=jmax)
        .flat_map(|j| [2f64.powi(-j), 1.0 - 2f64.powi(-j)])
        .collect()
}

#[test]
fn gaussian_examples() {
    let g = Gaussian::standard();
    assert!((g.density_quantile(0.5) - 0.3989423).abs() < 1e-7);
    assert_eq!(g.fprime_at_q(0.5), 0.0);
    assert!((g.fprime_at_q(0.3) - 0.18233).abs() < 1e-5);
    let g2 = Gaussian::new(4.0).unwrap();
    assert!((g2.density_quantile(0.5) - 0.3989423 / 2.0).abs() < 1e-7);
    assert!(Gaussian::new(0.0).is_err());
}

#[test]
fn logistic_examples() {
    let l = Logistic::new(1.0).unwrap();
    assert!((l.density_quantile(0.5) - 0.25).abs() < 1e-15);
    assert!((l.score_deriv(0.25) - 0.5).abs() < 1e-12);
    for y in [0.01, 0.2, 0.5, 0.9, 0.999] {
        assert!((l.second_deriv(y) + 2.0).abs() < 1e-6, "y = {y}");
        assert!((l.density_quantile(y) - y * (1.0 - y)).abs() < 1e-12);
    }
    assert!(Logistic::new(-1.0).is_err());
}

#[test]
fn pareto_examples() {
    let p = SmoothedPareto::new(6.0, 1.0).unwrap();
    for x in [0.0, 0.3, 1.0, 2.0, 2.5, 10.0] {
        assert_eq!(p.pdf(-x), p.pdf(x));
    }
    let x1 = 2.0;
    let core = integrate(|x| p.pdf(x), 0.0, x1, 1e-13).unwrap().value;
    let tail = integrate_unit(|s, _| p.pdf(x1 / s) * x1 / (s * s), 1e-13)
        .unwrap()
        .value;
    assert!((2.0 * (core + tail) - 1.0).abs() < 1e-8);
    let g = (1.0 + 6.0) / 6.0;
    let ratio: Vec<f64> = (10..=40)
        .map(|j| {
            let y = 2f64.powi(-j);
            p.density_quantile(y) * y.powf(-g)
        })
        .collect();
    let last = ratio[ratio.len() - 1];
    assert!(last.is_finite() && last > 0.0);
    assert!((ratio[ratio.len() - 2] - last).abs() < 1e-6 * last);
    assert_eq!(p.tail_exponents().gamma1, g);
    assert!(SmoothedPareto::new(4.0, 1.0).is_err());
    assert!(SmoothedPareto::new(6.0, 0.0).is_err());
}

#[test]
fn condition_report_examples() {
    let g = condition_report(&Gaussian::standard(), 2).unwrap();
    assert!(g.c_p && !g.a_p && !g.b && g.c_numeric);
    let l = condition_report(&Logistic::new(1.0).unwrap(), 2).unwrap();
    assert!(l.a_p && l.b);
    for m in analytic_models() {
        let r = condition_report(m.as_ref(), 1).unwrap();
        assert_eq!(r.gamma, r.gamma1.min(r.gamma2));
        assert_eq!(r.gamma0, r.gamma1.max(r.gamma2));
    }
    assert!(condition_report(&Gaussian::standard(), 4).is_err());
    let e = Exponential;
    assert!(e.flags().csr_all());
}

#[test]
fn quantile_round_trips() {
    for m in analytic_models() {
        for j in 1..1000 {
            let y = j as f64 / 1000.0;
            assert!(
                (m.cdf(m.quantile(y)) - y).abs() < 1e-10,
                "{} at {y}",
                m.name()
            );
        }
        let (a, b) = (m.quantile(0.005), m.quantile(0.995));
        for j in 0..=500 {
            let x = a + (b - a) * j as f64 / 500.0;
            assert!(
                (m.quantile(m.cdf(x)) - x).abs() < 1e-8 * x.abs().max(1.0),
                "{} at {x}",
                m.name()
            );
        }
    }
}

#[test]
fn derivative_consistency() {
    let h = 1e-5;
    for m in analytic_models() {
        for j in 0..=196 {
            let y = 0.01 + 0.98 * j as f64 / 196.0;
            let fd1 = (m.density_quantile(y + h) - m.density_quantile(y - h)) / (2.0 * h);
            assert!(
                (fd1 - m.score_deriv(y)).abs() < 1e-4,
                "{}: first at {y}",
                m.name()
            );
            let fd2 = (m.score_deriv(y + h) - m.score_deriv(y - h)) / (2.0 * h);
            assert!(
                (fd2 - m.second_deriv(y)).abs() < 1e-4 * m.second_deriv(y).abs().max(1.0),
                "{}: second at {y}",
                m.name()
            );
            let x = m.quantile(y);
            assert!((m.score_deriv(y) - m.pdf_derivative(x, 1) / m.pdf(x)).abs() < 1e-8);
        }
    }
}

#[test]
fn csr3_functional_is_bounded() {
    let models: Vec<Box<dyn Marginal>> = vec![
        Box::new(Gaussian::standard()),
        Box::new(Logistic::new(1.0).unwrap()),
    ];
    for m in models {
        let worst = tail_grid(40)
            .into_iter()
            .chain((1..100).map(|j| j as f64 / 100.0))
            .map(|y| {
                let fq = m.density_quantile(y);
                y * (1.0 - y) * m.fprime_at_q(y).abs() / (fq * fq)
            })
            .fold(0.0f64, f64::max);
        assert!(worst.is_finite() && worst <= 1.5, "{}: {worst}", m.name());
    }
}

#[test]
fn weight_bound_is_finite() {
    let mu = 0.05;
    for m in analytic_models() {
        let g = m.tail_exponents().gamma();
        let vals: Vec<f64> = tail_grid(40)
            .into_iter()
            .map(|y| (y * (1.0 - y)).powf(g + mu) / m.density_quantile(y))
            .collect();
        let deep = vals[40..].iter().fold(0.0f64, |a, &b| a.max(b));
        let shallow = vals[..40].iter().fold(0.0f64, |a, &b| a.max(b));
        assert!(
            deep.is_finite() && deep <= shallow,
            "{}: {deep} vs {shallow}",
            m.name()
        );
    }
}

#[test]
fn oracle_examples() {
    let m = 200_000;
    let spec = CoefficientSpec::new(0.7)
        .unwrap()
        .normalized(true)
        .with_max_lag(Some(256));
    let o =
        oracle_marginal_from_simulation(&spec, &InnovationSpec::standard_normal(), m, 9).unwrap();
    let sm = (m as f64).sqrt();
    let iqr = o.quantile(0.75) - o.quantile(0.25);
    assert!(o.quantile(0.5).abs() <= 3.0 * iqr / sm);
    for j in 1..=98 {
        let y = j as f64 / 100.0 + 0.005;
        assert!((o.cdf(o.quantile(y)) - y).abs() <= 2.0 / sm, "F(Q({y}))");
    }
    let g = Gaussian::standard();
    for j in 5..=95 {
        let y = j as f64 / 100.0;
        let rel = (o.density_quantile(y) - g.density_quantile(y)).abs() / g.density_quantile(y);
        assert!(rel < 0.05, "fQ at {y}: relative {rel}");
    }
    assert!(
        oracle_marginal_from_simulation(&spec, &InnovationSpec::standard_normal(), 1000, 9)
            .is_err()
    );
    let again =
        oracle_marginal_from_simulation(&spec, &InnovationSpec::standard_normal(), m, 9).unwrap();
    assert_eq!(o.quantile(0.3).to_bits(), again.quantile(0.3).to_bits());
}

fn laplace_oracle() -> &'static OracleMarginal {
    static ORACLE: OnceLock<OracleMarginal> = OnceLock::new();
    ORACLE.get_or_init(|| {
        let spec = CoefficientSpec::new(0.65)
            .unwrap()
            .normalized(true)
            .with_max_lag(Some(64));
        oracle_marginal_from_simulation(&spec, &InnovationSpec::double_exponential(), 100_000, 4)
            .unwrap()
    })
}

proptest! {
    #[test]
    fn prop_oracle_is_monotone(y in 0.001f64..0.998, d in 1e-6f64..0.001) {
        let o = laplace_oracle();
        prop_assert!(o.quantile(y + d) >= o.quantile(y));
        let x = o.quantile(y);
        prop_assert!(o.cdf(x + d) >= o.cdf(x));
    }
}
