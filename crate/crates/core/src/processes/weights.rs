use crate::error::{Error, Result};
use crate::marginals::ConditionFlags;

/// Which definition of `psi_1` applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WeightVariant {
    /// `psi_1 = 1` for `beta < 3/4` under `C(2)`.
    #[default]
    Standard,
    /// Order-`p` reduction: `psi_1 = 1` for `beta < 3/4` under `A(p)`,
    /// falling back to the standard rule otherwise.
    ReductionOrder(u32),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightContext {
    pub beta: f64,
    pub gamma: f64,
    pub mu: f64,
    pub flags: ConditionFlags,
    pub variant: WeightVariant,
}

impl WeightContext {
    pub fn new(beta: f64, gamma: f64, mu: f64, flags: ConditionFlags) -> Self {
        WeightContext {
            beta,
            gamma,
            mu,
            flags,
            variant: WeightVariant::Standard,
        }
    }

    pub fn with_variant(mut self, variant: WeightVariant) -> Self {
        self.variant = variant;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0) {
            return Err(Error::InvalidParameter {
                name: "mu",
                reason: format!("must be positive, got {}", self.mu),
            });
        }
        if !(self.gamma >= 1.0) {
            return Err(Error::InvalidParameter {
                name: "gamma",
                reason: format!("must be at least 1, got {}", self.gamma),
            });
        }
        Ok(())
    }

    /// Exponent `e` with `psi(y) = (y(1-y))^e`.
    pub fn exponent(&self, which: u8) -> Result<f64> {
        self.validate()?;
        let (b, g, mu) = (self.beta, self.gamma, self.mu);
        let short = b < 0.75;
        let f = &self.flags;
        Ok(match which {
            1 => {
                let flat = match self.variant {
                    WeightVariant::Standard => f.c(2),
                    WeightVariant::ReductionOrder(p) => f.a(p) || f.c(2),
                };
                if !short {
                    g + mu
                } else if flat {
                    0.0
                } else {
                    g - 0.5 + mu
                }
            }
            2 => {
                if !short {
                    g + mu
                } else if f.c(3) || g < 1.5 {
                    1.0 + mu
                } else {
                    g - 0.5 + mu
                }
            }
            3 => {
                if !short {
                    2.0 + 2.0 * g + mu
                } else if f.c(3) {
                    1.0 + mu
                } else {
                    2.0 * g - 1.0 + mu
                }
            }
            4 => {
                if short {
                    0.0
                } else {
                    1.0
                }
            }
            other => {
                return Err(Error::InvalidParameter {
                    name: "which",
                    reason: format!("unknown weight psi_{other}"),
                })
            }
        })
    }

    /// Weight function closure for repeated evaluation.
    pub fn function(&self, which: u8) -> Result<impl Fn(f64) -> f64 + Copy> {
        let e = self.exponent(which)?;
        Ok(move |y: f64| {
            if e == 0.0 {
                1.0
            } else {
                (y * (1.0 - y)).powf(e)
            }
        })
    }
}

/// `psi_which(y)` for `which` in `1..=4`.
pub fn weight_psi(which: u8, y: f64, ctx: &WeightContext) -> Result<f64> {
    if !(y > 0.0 && y < 1.0) {
        return Err(Error::QuantileDomain(y));
    }
    Ok(ctx.function(which)?(y))
}
