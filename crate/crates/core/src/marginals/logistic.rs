use super::{ConditionFlags, Marginal, TailExponents};
use crate::error::{Error, Result};

/// Logistic law `F(x) = 1 / (1 + exp(-x/s))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Logistic {
    scale: f64,
}

impl Logistic {
    pub fn new(scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "scale",
                reason: format!("must be positive, got {scale}"),
            });
        }
        Ok(Logistic { scale })
    }
}

impl Marginal for Logistic {
    fn name(&self) -> String {
        format!("logistic(scale={})", self.scale)
    }

    fn cdf(&self, x: f64) -> f64 {
        let t = x / self.scale;
        if t >= 0.0 {
            1.0 / (1.0 + (-t).exp())
        } else {
            let e = t.exp();
            e / (1.0 + e)
        }
    }

    fn pdf(&self, x: f64) -> f64 {
        let e = (-(x / self.scale).abs()).exp();
        e / (self.scale * (1.0 + e) * (1.0 + e))
    }

    fn quantile(&self, y: f64) -> f64 {
        self.scale * (y / (1.0 - y)).ln()
    }

    fn pdf_derivative(&self, x: f64, order: u32) -> f64 {
        let f = self.pdf(x);
        let u = self.cdf(x);
        let s = self.scale;
        let v = u * (1.0 - u);
        match order {
            0 => f,
            1 => f * (1.0 - 2.0 * u) / s,
            2 => f * (1.0 - 6.0 * v) / (s * s),
            3 => f * (1.0 - 2.0 * u) * (1.0 - 12.0 * v) / (s * s * s),
            _ => f64::NAN,
        }
    }

    fn tail_exponents(&self) -> TailExponents {
        TailExponents::symmetric(1.0)
    }

    fn flags(&self) -> ConditionFlags {
        ConditionFlags {
            a: [true; 3],
            b: true,
            c: [true; 3],
            csr: [true; 4],
        }
    }

    fn density_quantile(&self, y: f64) -> f64 {
        y * (1.0 - y) / self.scale
    }

    fn score_deriv(&self, y: f64) -> f64 {
        (1.0 - 2.0 * y) / self.scale
    }

    fn second_deriv(&self, _y: f64) -> f64 {
        -2.0 / self.scale
    }
}
