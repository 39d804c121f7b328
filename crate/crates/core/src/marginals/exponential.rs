use super::{ConditionFlags, Marginal, TailExponents};

/// Standard exponential law, used only as a subordination target.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Exponential;

impl Marginal for Exponential {
    fn name(&self) -> String {
        "exponential".into()
    }

    fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            -(-x).exp_m1()
        }
    }

    fn pdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            0.0
        } else {
            (-x).exp()
        }
    }

    fn quantile(&self, y: f64) -> f64 {
        -(-y).ln_1p()
    }

    fn pdf_derivative(&self, x: f64, order: u32) -> f64 {
        let f = self.pdf(x);
        if order % 2 == 1 {
            -f
        } else {
            f
        }
    }

    fn tail_exponents(&self) -> TailExponents {
        // f(Q(y)) = 1 - y; exponents below one are raised to one
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
        1.0 - y
    }
}
