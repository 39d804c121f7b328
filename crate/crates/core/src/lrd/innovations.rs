use rand::Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::error::{Error, Result};
use crate::marginals::{Marginal, SmoothedPareto};

/// Law of the i.i.d. innovations `eps_i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InnovationLaw {
    StandardNormal,
    /// Laplace law with unit variance.
    DoubleExponential,
    /// Symmetric Pareto tails `alpha / (2|x|^{1+alpha})`, smoothed near the origin.
    SmoothedSymmetricPareto {
        alpha: f64,
        width: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnovationSpec {
    pub law: InnovationLaw,
    /// Rescale draws to unit variance (a no-op for the normal and Laplace laws).
    pub unit_variance: bool,
}

impl InnovationSpec {
    pub fn standard_normal() -> Self {
        InnovationSpec {
            law: InnovationLaw::StandardNormal,
            unit_variance: true,
        }
    }

    pub fn double_exponential() -> Self {
        InnovationSpec {
            law: InnovationLaw::DoubleExponential,
            unit_variance: true,
        }
    }

    pub fn pareto(alpha: f64, width: f64, unit_variance: bool) -> Result<Self> {
        SmoothedPareto::new(alpha, width)?;
        Ok(InnovationSpec {
            law: InnovationLaw::SmoothedSymmetricPareto { alpha, width },
            unit_variance,
        })
    }

    pub fn is_gaussian(&self) -> bool {
        self.law == InnovationLaw::StandardNormal
    }

    /// Variance of one (possibly rescaled) innovation.
    pub fn variance(&self) -> Result<f64> {
        match self.law {
            InnovationLaw::StandardNormal | InnovationLaw::DoubleExponential => Ok(1.0),
            InnovationLaw::SmoothedSymmetricPareto { alpha, width } => {
                if self.unit_variance {
                    Ok(1.0)
                } else {
                    SmoothedPareto::new(alpha, width)?.variance()
                }
            }
        }
    }

    pub fn sampler(&self) -> Result<InnovationSampler> {
        let inner = match self.law {
            InnovationLaw::StandardNormal => SamplerKind::Normal,
            InnovationLaw::DoubleExponential => SamplerKind::Laplace,
            InnovationLaw::SmoothedSymmetricPareto { alpha, width } => {
                let model = SmoothedPareto::new(alpha, width)?;
                let scale = if self.unit_variance {
                    1.0 / model.variance()?.sqrt()
                } else {
                    1.0
                };
                SamplerKind::Pareto(Box::new(model), scale)
            }
        };
        Ok(InnovationSampler { inner })
    }
}

impl Default for InnovationSpec {
    fn default() -> Self {
        Self::standard_normal()
    }
}

#[derive(Debug, Clone)]
enum SamplerKind {
    Normal,
    Laplace,
    Pareto(Box<SmoothedPareto>, f64),
}

#[derive(Debug, Clone)]
pub struct InnovationSampler {
    inner: SamplerKind,
}

impl InnovationSampler {
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.inner {
            SamplerKind::Normal => rng.sample(StandardNormal),
            SamplerKind::Laplace => {
                let e: f64 = rng.sample(Exp1);
                let v = e * std::f64::consts::FRAC_1_SQRT_2;
                if rng.random::<bool>() {
                    v
                } else {
                    -v
                }
            }
            SamplerKind::Pareto(model, scale) => {
                // open interval draw keeps the quantile finite
                let u: f64 = rng.random_range(f64::EPSILON..1.0);
                scale * model.quantile(u)
            }
        }
    }

    pub fn fill<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        for v in out {
            *v = self.draw(rng);
        }
    }
}

impl TryFrom<&str> for InnovationLaw {
    type Error = Error;

    fn try_from(s: &str) -> Result<Self> {
        match s {
            "normal" | "gaussian" | "standard_normal" => Ok(InnovationLaw::StandardNormal),
            "laplace" | "double_exponential" => Ok(InnovationLaw::DoubleExponential),
            other => {
                if let Some(inner) = other
                    .strip_prefix("pareto(")
                    .and_then(|r| r.strip_suffix(')'))
                {
                    let alpha: f64 = inner
                        .trim()
                        .parse()
                        .map_err(|_| Error::Config(format!("bad pareto alpha in '{other}'")))?;
                    SmoothedPareto::new(alpha, 1.0)?;
                    Ok(InnovationLaw::SmoothedSymmetricPareto { alpha, width: 1.0 })
                } else {
                    Err(Error::Config(format!("unknown innovation law '{other}'")))
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn moments(spec: InnovationSpec) -> (f64, f64) {
        let s = spec.sampler().unwrap();
        let mut rng = stream(7, 0);
        let n = 200_000;
        let xs: Vec<f64> = (0..n).map(|_| s.draw(&mut rng)).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
        (mean, var)
    }

    #[test]
    fn laws_are_centered_with_unit_variance() {
        for spec in [
            InnovationSpec::standard_normal(),
            InnovationSpec::double_exponential(),
            InnovationSpec::pareto(6.0, 1.0, true).unwrap(),
        ] {
            let (m, v) = moments(spec);
            assert!(m.abs() < 0.015, "{spec:?} mean {m}");
            assert!((v - 1.0).abs() < 0.04, "{spec:?} var {v}");
        }
    }

    #[test]
    fn pareto_moment_condition() {
        assert!(InnovationSpec::pareto(4.0, 1.0, true).is_err());
        assert!(InnovationLaw::try_from("pareto(3)").is_err());
        assert!(InnovationLaw::try_from("pareto(5)").is_ok());
    }
}
