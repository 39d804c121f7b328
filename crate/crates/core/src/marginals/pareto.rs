use super::{ConditionFlags, Marginal, TailExponents};
use crate::error::{Error, Result};

/// Symmetric Pareto law with density proportional to `alpha / (2|x|^{1+alpha})`
/// for `|x| >= 1 + width`, joined at the origin by an even quintic that
/// matches value, slope and curvature at `|x| = 1 + width` and is flat to
/// third order at the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothedPareto {
    alpha: f64,
    width: f64,
    x1: f64,
    /// Bridge `h(t) = h0 + c3 t^3 + c4 t^4 + c5 t^5` in `t = |x| / x1` (`c3 = 0`).
    h0: f64,
    c: [f64; 3],
    z: f64,
}

impl SmoothedPareto {
    pub fn new(alpha: f64, width: f64) -> Result<Self> {
        if !(alpha > 4.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "alpha",
                reason: format!("fourth moments require alpha > 4, got {alpha}"),
            });
        }
        if !(width > 0.0 && width.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "width",
                reason: format!("must be positive, got {width}"),
            });
        }
        let x1 = 1.0 + width;
        let g0 = 0.5 * alpha * x1.powf(-1.0 - alpha);
        // derivatives in t of g(x1 t)
        let g1 = -(1.0 + alpha) * g0;
        let g2 = (1.0 + alpha) * (2.0 + alpha) * g0;
        // c3 = 0 keeps the even extension C^3 at the origin
        let c5 = (g2 - 3.0 * g1) / 5.0;
        let c4 = (g1 - 5.0 * c5) / 4.0;
        let h0 = g0 - c4 - c5;
        let c3 = 0.0;
        let z = 2.0 * x1 * (h0 + c3 / 4.0 + c4 / 5.0 + c5 / 6.0) + x1.powf(-alpha);
        Ok(SmoothedPareto {
            alpha,
            width,
            x1,
            h0,
            c: [c3, c4, c5],
            z,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    /// Second moment.
    pub fn variance(&self) -> Result<f64> {
        let [c3, c4, c5] = self.c;
        let x1 = self.x1;
        let a = self.alpha;
        let centre = x1.powi(3) * (self.h0 / 3.0 + c3 / 6.0 + c4 / 7.0 + c5 / 8.0);
        let tail = 0.5 * a * x1.powf(2.0 - a) / (a - 2.0);
        Ok(2.0 * (centre + tail) / self.z)
    }

    /// Unnormalised `h^{(order)}(|x|)` on the bridge, in `x` units.
    fn bridge(&self, ax: f64, order: u32) -> f64 {
        let t = ax / self.x1;
        let [c3, c4, c5] = self.c;
        let v = match order {
            0 => self.h0 + t * t * t * (c3 + t * (c4 + t * c5)),
            1 => t * t * (3.0 * c3 + t * (4.0 * c4 + t * 5.0 * c5)),
            2 => t * (6.0 * c3 + t * (12.0 * c4 + t * 20.0 * c5)),
            3 => 6.0 * c3 + t * (24.0 * c4 + t * 60.0 * c5),
            _ => f64::NAN,
        };
        v / self.x1.powi(order as i32)
    }

    fn tail(&self, ax: f64, order: u32) -> f64 {
        let a = self.alpha;
        let falling: f64 = (0..order).map(|j| -(1.0 + a + j as f64)).product();
        0.5 * a * falling * ax.powf(-1.0 - a - order as f64)
    }

    /// `P(0 <= X <= x)` times `Z` for `0 <= x <= x1`.
    fn bridge_mass(&self, ax: f64) -> f64 {
        let t = ax / self.x1;
        let [c3, c4, c5] = self.c;
        self.x1 * t * (self.h0 + t * t * t * (c3 / 4.0 + t * (c4 / 5.0 + t * c5 / 6.0)))
    }

    fn upper_cdf(&self, ax: f64) -> f64 {
        if ax >= self.x1 {
            1.0 - 0.5 * ax.powf(-self.alpha) / self.z
        } else {
            0.5 + self.bridge_mass(ax) / self.z
        }
    }
}

impl Marginal for SmoothedPareto {
    fn name(&self) -> String {
        format!("pareto(alpha={}, width={})", self.alpha, self.width)
    }

    fn cdf(&self, x: f64) -> f64 {
        if x >= 0.0 {
            self.upper_cdf(x)
        } else if -x >= self.x1 {
            0.5 * (-x).powf(-self.alpha) / self.z
        } else {
            0.5 - self.bridge_mass(-x) / self.z
        }
    }

    fn pdf(&self, x: f64) -> f64 {
        self.pdf_derivative(x, 0)
    }

    fn quantile(&self, y: f64) -> f64 {
        if y < 0.5 {
            return -self.quantile(1.0 - y);
        }
        let upper = 1.0 - y;
        let edge = 0.5 * self.x1.powf(-self.alpha) / self.z;
        if upper <= edge {
            return (2.0 * self.z * upper).powf(-1.0 / self.alpha);
        }
        // bridge: solve bridge_mass(x) = (y - 1/2) Z by safeguarded Newton
        let target = (y - 0.5) * self.z;
        let (mut lo, mut hi) = (0.0, self.x1);
        let mut x = target / self.h0;
        for _ in 0..100 {
            if !(x > lo && x < hi) {
                x = 0.5 * (lo + hi);
            }
            let r = self.bridge_mass(x) - target;
            if r > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            let step = r / self.bridge(x, 0);
            x -= step;
            if step.abs() <= 1e-15 * x.abs().max(1e-300) || hi - lo <= 1e-16 * hi {
                break;
            }
        }
        x.clamp(lo, hi)
    }

    fn pdf_derivative(&self, x: f64, order: u32) -> f64 {
        let ax = x.abs();
        let v = if ax >= self.x1 {
            self.tail(ax, order)
        } else {
            self.bridge(ax, order)
        };
        let sign = if x < 0.0 && order % 2 == 1 { -1.0 } else { 1.0 };
        sign * v / self.z
    }

    fn tail_exponents(&self) -> TailExponents {
        TailExponents::symmetric((1.0 + self.alpha) / self.alpha)
    }

    fn flags(&self) -> ConditionFlags {
        // (f o Q)'' grows like (1-y)^{1/alpha - 1} in the tails
        ConditionFlags {
            a: [true; 3],
            b: false,
            c: [true; 3],
            csr: [true; 4],
        }
    }
}
