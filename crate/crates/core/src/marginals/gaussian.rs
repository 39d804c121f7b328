use super::{ConditionFlags, Marginal, TailExponents};
use crate::error::{Error, Result};
use crate::numerics::{norm_cdf, norm_pdf, norm_quantile};

/// Centred normal law with variance `sigma^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gaussian {
    sigma: f64,
}

impl Gaussian {
    pub fn new(variance: f64) -> Result<Self> {
        if !(variance > 0.0 && variance.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "variance",
                reason: format!("must be positive, got {variance}"),
            });
        }
        Ok(Gaussian {
            sigma: variance.sqrt(),
        })
    }

    pub fn standard() -> Self {
        Gaussian { sigma: 1.0 }
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

impl Marginal for Gaussian {
    fn name(&self) -> String {
        format!("gaussian(variance={})", self.sigma * self.sigma)
    }

    fn cdf(&self, x: f64) -> f64 {
        norm_cdf(x / self.sigma)
    }

    fn pdf(&self, x: f64) -> f64 {
        norm_pdf(x / self.sigma) / self.sigma
    }

    fn quantile(&self, y: f64) -> f64 {
        self.sigma * norm_quantile(y)
    }

    fn pdf_derivative(&self, x: f64, order: u32) -> f64 {
        let z = x / self.sigma;
        let hermite = match order {
            0 => 1.0,
            1 => -z,
            2 => z * z - 1.0,
            3 => -(z * z * z - 3.0 * z),
            _ => f64::NAN,
        };
        hermite * norm_pdf(z) / self.sigma.powi(order as i32 + 1)
    }

    fn tail_exponents(&self) -> TailExponents {
        TailExponents::symmetric(1.0)
    }

    fn flags(&self) -> ConditionFlags {
        ConditionFlags {
            a: [false; 3],
            b: false,
            c: [true; 3],
            csr: [true; 4],
        }
    }

    fn gaussian_variance(&self) -> Option<f64> {
        Some(self.sigma * self.sigma)
    }

    fn score_deriv(&self, y: f64) -> f64 {
        -norm_quantile(y) / self.sigma
    }

    fn second_deriv(&self, y: f64) -> f64 {
        -1.0 / (self.sigma * norm_pdf(norm_quantile(y)))
    }
}
