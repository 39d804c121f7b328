use super::{ConditionFlags, Marginal};
use crate::error::{Error, Result};

/// Analytic flags for one order `p`, plus a numeric spot check of `C(p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    pub p: u32,
    pub a_p: bool,
    pub b: bool,
    pub c_p: bool,
    pub csr: [bool; 4],
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma: f64,
    pub gamma0: f64,
    /// `sup_y sqrt(y(1-y)) |f^{(r+1)}(Q)/f(Q)|` on the tail grid, for `r < p`.
    pub c_sup: Vec<f64>,
    /// Whether the numeric sup looked bounded for every `r < p`.
    pub c_numeric: bool,
}

impl ConditionReport {
    pub fn flags(&self) -> ConditionFlags {
        let mut f = ConditionFlags {
            b: self.b,
            csr: self.csr,
            ..Default::default()
        };
        for i in 0..self.p as usize {
            f.a[i] = self.a_p;
            f.c[i] = self.c_p;
        }
        f
    }
}

/// Tail points `2^{-j}` and `1 - 2^{-j}` for `j = j0..=j1`.
fn tail_points(j0: i32, j1: i32) -> Vec<f64> {
    (j0..=j1)
        .flat_map(|j| {
            let y = 2f64.powi(-j);
            [y, 1.0 - y]
        })
        .collect()
}

fn c_functional(m: &dyn Marginal, y: f64, r: u32) -> f64 {
    let x = m.quantile(y);
    (y * (1.0 - y)).sqrt() * (m.pdf_derivative(x, r + 1) / m.pdf(x)).abs()
}

pub fn condition_report(model: &dyn Marginal, p: u32) -> Result<ConditionReport> {
    if !(1..=3).contains(&p) {
        return Err(Error::InvalidParameter {
            name: "p",
            reason: format!("condition order must be 1, 2 or 3, got {p}"),
        });
    }
    let flags = model.flags();
    let t = model.tail_exponents();
    let centre: Vec<f64> = (1..=4095).map(|j| j as f64 / 4096.0).collect();
    let mut c_sup = Vec::new();
    let mut bounded = true;
    for r in 0..p {
        let sup_over = |ys: &[f64]| {
            ys.iter()
                .map(|&y| c_functional(model, y, r))
                .filter(|v| v.is_finite())
                .fold(0.0, f64::max)
        };
        let inner = sup_over(&centre).max(sup_over(&tail_points(1, 8)));
        let outer = sup_over(&tail_points(9, 16));
        // divergence shows up as continued growth in the deep tail
        if outer > 1.5 * inner + 1e-12 {
            bounded = false;
        }
        c_sup.push(inner.max(outer));
    }
    Ok(ConditionReport {
        p,
        a_p: flags.a(p),
        b: flags.b,
        c_p: flags.c(p),
        csr: flags.csr,
        gamma1: t.gamma1,
        gamma2: t.gamma2,
        gamma: t.gamma(),
        gamma0: t.gamma0(),
        c_sup,
        c_numeric: bounded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::marginals::{Gaussian, Logistic, SmoothedPareto};

    #[test]
    fn examples() {
        let g = condition_report(&Gaussian::standard(), 2).unwrap();
        assert!(g.c_p && !g.a_p && !g.b);
        assert!(g.c_numeric);
        let l = condition_report(&Logistic::new(1.0).unwrap(), 2).unwrap();
        assert!(l.a_p && l.b);
        for m in [
            &Gaussian::standard() as &dyn Marginal,
            &Logistic::new(1.0).unwrap(),
            &SmoothedPareto::new(6.0, 1.0).unwrap(),
        ] {
            let r = condition_report(m, 3).unwrap();
            assert_eq!(r.gamma, r.gamma1.min(r.gamma2));
            assert!(r.c_numeric, "{}", m.name());
        }
        assert!(condition_report(&Gaussian::standard(), 4).is_err());
    }

    #[test]
    fn weight_bound_is_finite() {
        let mu = 0.05;
        for m in [
            &Gaussian::standard() as &dyn Marginal,
            &Logistic::new(1.0).unwrap(),
            &SmoothedPareto::new(6.0, 1.0).unwrap(),
        ] {
            let g = m.tail_exponents().gamma();
            let mut ys: Vec<f64> = (1..=4095).map(|j| j as f64 / 4096.0).collect();
            ys.extend(tail_points(1, 16));
            let sup = ys
                .iter()
                .map(|&y| (y * (1.0 - y)).powf(g + mu) / m.density_quantile(y))
                .fold(0.0, f64::max);
            assert!(sup.is_finite() && sup < 10.0, "{}: {sup}", m.name());
        }
    }

    #[test]
    fn csr4_monotone_near_lower_edge() {
        // density nondecreasing on Q((0, 0.05])
        for m in [
            &Gaussian::standard() as &dyn Marginal,
            &SmoothedPareto::new(6.0, 1.0).unwrap(),
        ] {
            let ys: Vec<f64> = (1..=500).map(|j| 0.05 * j as f64 / 500.0).collect();
            assert!(ys
                .windows(2)
                .all(|w| m.density_quantile(w[0]) <= m.density_quantile(w[1])));
        }
    }
}
