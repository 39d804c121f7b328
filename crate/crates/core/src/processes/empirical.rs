use std::sync::Arc;

use super::grid::YGrid;
use crate::error::{Error, Result};
use crate::lrd::LrdPath;
use crate::marginals::Marginal;
use crate::numerics::fsum;
use crate::stats::sort_floats;

/// Right-continuous step function `F_n(x) = #{X_i <= x} / n`.
#[derive(Debug, Clone)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(values: &[f64]) -> Self {
        let mut sorted = values.to_vec();
        sort_floats(&mut sorted);
        EmpiricalCdf { sorted }
    }

    pub fn count_le(&self, x: f64) -> usize {
        self.sorted.partition_point(|&v| v <= x)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.count_le(x) as f64 / self.sorted.len() as f64
    }

    pub fn order_statistics(&self) -> &[f64] {
        &self.sorted
    }
}

pub fn empirical_cdf(path: &LrdPath) -> EmpiricalCdf {
    EmpiricalCdf::new(&path.x)
}

/// One-based rank `ceil(n y)` used by the left-continuous sample quantile.
/// Values of `n y` within rounding of an integer snap to that integer so that
/// `y = k/n` selects the `k`-th order statistic.
pub fn sample_rank(n: usize, y: f64) -> Result<usize> {
    if !(y > 0.0 && y <= 1.0) {
        return Err(Error::QuantileDomain(y));
    }
    let t = n as f64 * y;
    let r = t.round();
    let k = if (t - r).abs() <= 8.0 * f64::EPSILON * t.max(1.0) {
        r
    } else {
        t.ceil()
    };
    Ok((k as usize).clamp(1, n))
}

/// `Q_n(y) = X_{ceil(n y) : n}`.
pub fn sample_quantile(path: &LrdPath, y: f64) -> Result<f64> {
    let k = sample_rank(path.n(), y)?;
    let mut xs = path.x.clone();
    let (_, kth, _) = xs.select_nth_unstable_by(k - 1, f64::total_cmp);
    Ok(*kth)
}

/// `U_i = F(X_i)`.
pub fn uniform_transform(path: &LrdPath, marginal: &dyn Marginal) -> Vec<f64> {
    path.x.iter().map(|&x| marginal.cdf(x)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProcessId {
    /// `alpha_n(y) = sigma^{-1} n (E_n(y) - y)`.
    AlphaN,
    /// `u_n(y) = sigma^{-1} n (y - U_n(y))`.
    UN,
    /// `q_n(y) = sigma^{-1} n (Q(y) - Q_n(y))`.
    QN,
    /// `beta_n(Q(y)) = sigma^{-1} n (F_n(Q(y)) - F(Q(y)))`.
    BetaNAtQ,
    /// `R_n = alpha_n - f(Q) q_n`.
    BkGeneral,
    /// `R~_n = alpha_n - u_n`.
    BkUniform,
    /// `V~_{n,p}(y)`, not normalised.
    VTilde,
}

impl ProcessId {
    pub fn name(&self) -> &'static str {
        match self {
            ProcessId::AlphaN => "alpha_n",
            ProcessId::UN => "u_n",
            ProcessId::QN => "q_n",
            ProcessId::BetaNAtQ => "beta_n_at_Q",
            ProcessId::BkGeneral => "bk_general",
            ProcessId::BkUniform => "bk_uniform",
            ProcessId::VTilde => "v_tilde_np",
        }
    }
}

/// `Q`, `f(Q)` and `f'(Q)` tabulated on a grid, shared across replications.
#[derive(Debug, Clone)]
pub struct MarginalOnGrid {
    pub grid: Arc<YGrid>,
    pub q: Vec<f64>,
    pub fq: Vec<f64>,
    pub fpq: Vec<f64>,
}

impl MarginalOnGrid {
    pub fn new(grid: Arc<YGrid>, marginal: &dyn Marginal) -> Self {
        let q: Vec<f64> = grid
            .points()
            .iter()
            .map(|&y| marginal.quantile(y))
            .collect();
        let fq = q.iter().map(|&x| marginal.pdf(x)).collect();
        let fpq = q.iter().map(|&x| marginal.pdf_derivative(x, 1)).collect();
        MarginalOnGrid { grid, q, fq, fpq }
    }
}

/// Everything needed to evaluate the processes of one path: order
/// statistics of `X` and `U = F(X)`, the normaliser and the partial sums.
#[derive(Debug, Clone)]
pub struct SampleContext<'a> {
    pub n: usize,
    pub sorted_x: Vec<f64>,
    pub sorted_u: Vec<f64>,
    pub sigma: f64,
    pub y1: f64,
    pub y2: Option<f64>,
    pub marginal: &'a dyn Marginal,
}

impl<'a> SampleContext<'a> {
    pub fn new(x: &[f64], marginal: &'a dyn Marginal, sigma: f64) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::InvalidParameter {
                name: "n",
                reason: "empty path".into(),
            });
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "sigma",
                reason: format!("normaliser must be positive, got {sigma}"),
            });
        }
        let mut sorted_x = x.to_vec();
        sort_floats(&mut sorted_x);
        let sorted_u: Vec<f64> = sorted_x.iter().map(|&v| marginal.cdf(v)).collect();
        if sorted_u.iter().any(|u| !u.is_finite()) {
            return Err(Error::InconsistentMarginal("F(X_i) is not finite".into()));
        }
        Ok(SampleContext {
            n: x.len(),
            y1: fsum(x.iter().copied()),
            y2: None,
            sorted_x,
            sorted_u,
            sigma,
            marginal,
        })
    }

    pub fn from_path(path: &LrdPath, marginal: &'a dyn Marginal, sigma: f64) -> Result<Self> {
        Self::new(&path.x, marginal, sigma)
    }

    pub fn with_y2(mut self, y2: f64) -> Self {
        self.y2 = Some(y2);
        self
    }

    fn nf(&self) -> f64 {
        self.n as f64
    }

    pub fn rank(&self, y: f64) -> usize {
        sample_rank(self.n, y).expect("grid point in (0, 1]")
    }

    /// `U_n(y)`.
    pub fn uniform_quantile(&self, y: f64) -> f64 {
        self.sorted_u[self.rank(y) - 1]
    }

    /// `Q_n(y)`.
    pub fn sample_quantile(&self, y: f64) -> f64 {
        self.sorted_x[self.rank(y) - 1]
    }

    pub fn count_u_le(&self, y: f64) -> usize {
        self.sorted_u.partition_point(|&u| u <= y)
    }

    pub fn alpha(&self, y: f64) -> f64 {
        (self.count_u_le(y) as f64 - self.nf() * y) / self.sigma
    }

    pub fn u(&self, y: f64) -> f64 {
        self.nf() * (y - self.uniform_quantile(y)) / self.sigma
    }

    /// `q_n(y)` given the true quantile `Q(y)`.
    pub fn q_with(&self, y: f64, q: f64) -> f64 {
        self.nf() * (q - self.sample_quantile(y)) / self.sigma
    }

    pub fn q(&self, y: f64) -> f64 {
        self.q_with(y, self.marginal.quantile(y))
    }

    pub fn beta_at_q(&self, y: f64) -> f64 {
        let q = self.marginal.quantile(y);
        let count = self.sorted_x.partition_point(|&v| v <= q);
        (count as f64 - self.nf() * self.marginal.cdf(q)) / self.sigma
    }

    pub fn bk_uniform(&self, y: f64) -> f64 {
        self.alpha(y) - self.u(y)
    }

    pub fn bk_general_with(&self, y: f64, q: f64, fq: f64) -> f64 {
        self.alpha(y) - fq * self.q_with(y, q)
    }

    pub fn bk_general(&self, y: f64) -> f64 {
        let q = self.marginal.quantile(y);
        self.bk_general_with(y, q, self.marginal.pdf(q))
    }

    /// `V~_{n,1} = -f(Q) Y_{n,1}` and `V~_{n,2} = V~_{n,1} + f'(Q) Y_{n,2}`.
    pub fn v_tilde_with(&self, p: u32, fq: f64, fpq: f64) -> Result<f64> {
        match p {
            1 => Ok(-fq * self.y1),
            2 => {
                let y2 = self.y2.ok_or(Error::MissingMarginalQuantity(
                    "Y_{n,2} for the second-order expansion",
                ))?;
                Ok(-fq * self.y1 + fpq * y2)
            }
            _ => Err(Error::Unsupported(format!(
                "expansion order p={p}; only p in {{1,2}} is implemented"
            ))),
        }
    }

    pub fn v_tilde(&self, y: f64, p: u32) -> Result<f64> {
        let q = self.marginal.quantile(y);
        self.v_tilde_with(p, self.marginal.pdf(q), self.marginal.pdf_derivative(q, 1))
    }

    pub fn eval(&self, id: ProcessId, y: f64, p: u32) -> Result<f64> {
        Ok(match id {
            ProcessId::AlphaN => self.alpha(y),
            ProcessId::UN => self.u(y),
            ProcessId::QN => self.q(y),
            ProcessId::BetaNAtQ => self.beta_at_q(y),
            ProcessId::BkGeneral => self.bk_general(y),
            ProcessId::BkUniform => self.bk_uniform(y),
            ProcessId::VTilde => self.v_tilde(y, p)?,
        })
    }
}

/// Process values on a grid.
#[derive(Debug, Clone)]
pub struct ProcessSample {
    pub grid: Arc<YGrid>,
    pub values: Vec<f64>,
    pub process_id: ProcessId,
    pub n: usize,
    pub normalizer: f64,
}

impl ProcessSample {
    /// CSV rows `y,value,weight,weighted_value`.
    pub fn to_csv(&self, weight: impl Fn(f64) -> f64) -> String {
        let mut out = String::from("y,value,weight,weighted_value\n");
        for (&y, &v) in self.grid.points().iter().zip(&self.values) {
            let w = weight(y);
            out.push_str(&format!("{y:.16e},{v:.16e},{w:.16e},{:.16e}\n", w * v));
        }
        out
    }
}

/// Evaluates `process_id` on every grid point; `sigma` is the exact
/// `sigma_{n,1}` of the path's model.
pub fn build_process(
    path: &LrdPath,
    marginal: &dyn Marginal,
    grid: Arc<YGrid>,
    process_id: ProcessId,
    p: u32,
    sigma: f64,
) -> Result<ProcessSample> {
    let mut ctx = SampleContext::from_path(path, marginal, sigma)?;
    if process_id == ProcessId::VTilde {
        if !(1..=2).contains(&p) {
            return Err(Error::Unsupported(format!(
                "expansion order p={p}; only p in {{1,2}} is implemented"
            )));
        }
        if p == 2 {
            ctx = ctx.with_y2(crate::lrd::partial_sum_y(path, 2)?);
        }
    }
    let values = grid
        .points()
        .iter()
        .map(|&y| ctx.eval(process_id, y, p))
        .collect::<Result<Vec<_>>>()?;
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InconsistentMarginal(format!(
            "{} has non-finite values on the grid",
            process_id.name()
        )));
    }
    Ok(ProcessSample {
        grid,
        values,
        process_id,
        n: path.n(),
        normalizer: sigma,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lrd::{
        sample_path, CoefficientSpec, ConvolutionMethod, InnovationSpec, SecondOrder,
    };
    use crate::marginals::Gaussian;
    use proptest::prelude::*;

    fn toy_path(x: Vec<f64>) -> LrdPath {
        let n = x.len();
        let mut p = LrdPath::from_innovations(
            vec![1.0],
            x,
            CoefficientSpec::new(0.7).unwrap(),
            ConvolutionMethod::Direct,
        )
        .unwrap();
        assert_eq!(p.n(), n);
        p.k = 0;
        p
    }

    #[test]
    fn empirical_cdf_and_quantile_examples() {
        let p = toy_path(vec![3.0, -1.0, 2.0, 0.5]);
        let f = empirical_cdf(&p);
        assert_eq!(f.eval(-5.0), 0.0);
        assert_eq!(f.eval(3.0), 1.0);
        assert_eq!(f.eval(0.5), 0.5);
        assert_eq!(sample_quantile(&p, 0.25).unwrap(), -1.0);
        assert_eq!(sample_quantile(&p, 1.0).unwrap(), 3.0);
        assert_eq!(sample_quantile(&p, 0.5).unwrap(), 0.5);
        assert!(matches!(
            sample_quantile(&p, 0.0),
            Err(Error::QuantileDomain(_))
        ));
    }

    #[test]
    fn uniform_transform_examples() {
        let p = toy_path(vec![0.0, 1.0, -2.0]);
        let u = uniform_transform(&p, &Gaussian::standard());
        assert_eq!(u[0], 0.5);
        assert!(u[2] < u[0] && u[0] < u[1]);
    }

    #[test]
    fn single_observation() {
        let g = Gaussian::standard();
        let p = toy_path(vec![0.3]);
        let sigma = 1.0;
        let ctx = SampleContext::from_path(&p, &g, sigma).unwrap();
        let u1 = g.cdf(0.3);
        for y in [0.1, 0.5, u1, 0.9] {
            assert_eq!(ctx.u(y), (y - u1) / sigma);
        }
    }

    fn lrd_context_checks(seed: u64) {
        let spec = CoefficientSpec::new(0.65)
            .unwrap()
            .normalized(true)
            .with_max_lag(Some(2048));
        let path = sample_path(&spec, &InnovationSpec::standard_normal(), 512, seed).unwrap();
        let g = Gaussian::standard();
        let so = SecondOrder::from_spec(spec, 1.0).unwrap();
        let sigma = so.sigma2_n1(512).sqrt();
        let grid = Arc::new(YGrid::for_sample_size(512));
        let ctx = SampleContext::from_path(&path, &g, sigma).unwrap();
        for &y in grid.points() {
            let a = ctx.alpha(y);
            assert!((a - ctx.beta_at_q(y)).abs() <= 1e-9 * (1.0 + a.abs()));
            let un = ctx.uniform_quantile(y);
            assert!((ctx.u(y) - ctx.alpha(un)).abs() <= 1.0 / sigma);
        }
        // integral of Q_n equals the sample mean
        let integral: f64 = ctx.sorted_x.iter().sum::<f64>() / 512.0;
        assert!((integral - ctx.y1 / 512.0).abs() < 1e-12);
        // Galois pair
        let f = EmpiricalCdf::new(&path.x);
        for j in 1..=512 {
            let y = j as f64 / 512.0;
            assert!(f.eval(ctx.sample_quantile(y)) >= y);
        }
        for &x in &path.x {
            assert!(ctx.sample_quantile(f.eval(x)) <= x);
        }
    }

    #[test]
    fn identities_on_lrd_paths() {
        for seed in 0..5 {
            lrd_context_checks(seed);
        }
    }

    #[test]
    fn scale_equivariance() {
        let spec = CoefficientSpec::new(0.7)
            .unwrap()
            .normalized(true)
            .with_max_lag(Some(256));
        let path = sample_path(&spec, &InnovationSpec::standard_normal(), 300, 9).unwrap();
        let c = 2.5;
        let scaled: Vec<f64> = path.x.iter().map(|x| c * x).collect();
        let g1 = Gaussian::standard();
        let gc = Gaussian::new(c * c).unwrap();
        let a = SampleContext::new(&path.x, &g1, 7.0).unwrap();
        let b = SampleContext::new(&scaled, &gc, 7.0 * c).unwrap();
        for j in 1..100 {
            let y = j as f64 / 100.0;
            assert!((a.u(y) * 7.0 - b.u(y) * 7.0 * c).abs() < 1e-9);
            assert!((a.alpha(y) * 7.0 - b.alpha(y) * 7.0 * c).abs() < 1e-9);
            let fq_q_a = g1.density_quantile(y) * a.q(y);
            let fq_q_b = gc.density_quantile(y) * b.q(y) * c;
            assert!((fq_q_a - fq_q_b).abs() < 1e-9);
        }
    }

    #[test]
    fn v_tilde_orders() {
        let g = Gaussian::standard();
        let p = toy_path(vec![0.2, -0.4, 1.0]);
        let ctx = SampleContext::from_path(&p, &g, 1.0).unwrap();
        assert!(matches!(
            ctx.v_tilde(0.3, 2),
            Err(Error::MissingMarginalQuantity(_))
        ));
        let ctx = ctx.with_y2(0.7);
        let diff = ctx.v_tilde(0.3, 2).unwrap() - ctx.v_tilde(0.3, 1).unwrap();
        assert!((diff - g.fprime_at_q(0.3) * 0.7).abs() < 1e-15);
        assert!(ctx.v_tilde(0.3, 3).is_err());
    }

    proptest! {
        #[test]
        fn rank_matches_ceiling(n in 1usize..5000, k in 1usize..5000) {
            prop_assume!(k <= n);
            prop_assert_eq!(sample_rank(n, k as f64 / n as f64).unwrap(), k);
            let y = (k as f64 - 0.5) / n as f64;
            prop_assert_eq!(sample_rank(n, y).unwrap(), k);
        }
    }
}
