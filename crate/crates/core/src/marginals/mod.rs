//! Marginal laws: distribution, density and quantile functions, the
//! density-quantile function `f(Q(y))` with derivatives, tail exponents and
//! regularity flags.

mod condition;
mod exponential;
mod gaussian;
mod logistic;
mod oracle;
mod pareto;

pub use condition::{condition_report, ConditionReport};
pub use exponential::Exponential;
pub use gaussian::Gaussian;
pub use logistic::Logistic;
pub use oracle::{oracle_marginal_from_simulation, OracleMarginal};
pub use pareto::SmoothedPareto;

/// Analytic regularity flags of a marginal law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConditionFlags {
    /// `A(1)..A(3)`: `(f^{(r-1)} o Q)'` bounded for `r <= p`.
    pub a: [bool; 3],
    /// `(f o Q)''` bounded.
    pub b: bool,
    /// `C(1)..C(3)`: `sqrt(y(1-y)) f^{(r+1)}(Q)/f(Q)` bounded for `r < p`.
    pub c: [bool; 3],
    pub csr: [bool; 4],
}

impl ConditionFlags {
    pub fn a(&self, p: u32) -> bool {
        (1..=3).contains(&p) && self.a[p as usize - 1]
    }

    pub fn c(&self, p: u32) -> bool {
        (1..=3).contains(&p) && self.c[p as usize - 1]
    }

    pub fn csr_all(&self) -> bool {
        self.csr.iter().all(|&b| b)
    }
}

/// Tail exponents: `f(Q(y)) ~ y^{gamma1}` at 0 and `(1-y)^{gamma2}` at 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailExponents {
    pub gamma1: f64,
    pub gamma2: f64,
}

impl TailExponents {
    pub fn symmetric(g: f64) -> Self {
        TailExponents {
            gamma1: g,
            gamma2: g,
        }
    }

    pub fn gamma(&self) -> f64 {
        self.gamma1.min(self.gamma2)
    }

    pub fn gamma0(&self) -> f64 {
        self.gamma1.max(self.gamma2)
    }
}

pub trait Marginal: Send + Sync + std::fmt::Debug {
    fn name(&self) -> String;
    fn cdf(&self, x: f64) -> f64;
    fn pdf(&self, x: f64) -> f64;
    fn quantile(&self, y: f64) -> f64;
    /// `f^{(order)}(x)` for `order` in `0..=3`.
    fn pdf_derivative(&self, x: f64, order: u32) -> f64;
    fn tail_exponents(&self) -> TailExponents;
    fn flags(&self) -> ConditionFlags;

    /// Variance when the law is Gaussian; `None` otherwise.
    fn gaussian_variance(&self) -> Option<f64> {
        None
    }

    fn density_quantile(&self, y: f64) -> f64 {
        self.pdf(self.quantile(y))
    }

    fn fprime_at_q(&self, y: f64) -> f64 {
        self.pdf_derivative(self.quantile(y), 1)
    }

    fn fsecond_at_q(&self, y: f64) -> f64 {
        self.pdf_derivative(self.quantile(y), 2)
    }

    /// `(f o Q)'(y) = f'(Q(y)) / f(Q(y))`.
    fn score_deriv(&self, y: f64) -> f64 {
        let x = self.quantile(y);
        self.pdf_derivative(x, 1) / self.pdf(x)
    }

    /// `(f o Q)''(y) = (f''f - f'^2) / f^3` at `Q(y)`.
    fn second_deriv(&self, y: f64) -> f64 {
        let x = self.quantile(y);
        let f = self.pdf(x);
        let d1 = self.pdf_derivative(x, 1);
        let d2 = self.pdf_derivative(x, 2);
        (d2 * f - d1 * d1) / (f * f * f)
    }
}
