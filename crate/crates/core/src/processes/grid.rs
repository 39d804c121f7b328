use crate::error::{Error, Result};

pub const DEFAULT_GRID_POINTS: usize = 4095;
pub const DEFAULT_TAIL_DEPTH: u32 = 16;
/// Jump locations `k/n` are added in full up to this sample size.
pub const MAX_JUMP_POINTS: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridKind {
    Uniform { m: usize },
    TailRefined { m: usize, j_max: u32 },
}

/// Strictly increasing evaluation points in `(0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct YGrid {
    points: Vec<f64>,
    kind: GridKind,
}

impl YGrid {
    /// `y_j = j / (m + 1)`, `j = 1..=m`.
    pub fn uniform(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParameter {
                name: "m",
                reason: "grid needs at least one point".into(),
            });
        }
        let points = (1..=m).map(|j| j as f64 / (m + 1) as f64).collect();
        Ok(YGrid {
            points,
            kind: GridKind::Uniform { m },
        })
    }

    /// Uniform grid plus `2^{-j}` and `1 - 2^{-j}` for `j <= j_max`.
    pub fn tail_refined(m: usize, j_max: u32) -> Result<Self> {
        let mut g = Self::uniform(m)?;
        for j in 1..=j_max as i32 {
            let y = 2f64.powi(-j);
            g.points.push(y);
            g.points.push(1.0 - y);
        }
        g.kind = GridKind::TailRefined { m, j_max };
        g.normalise();
        Ok(g)
    }

    /// Default grid for sample size `n`: tail refined, plus the jump points
    /// `k/n` of the sample quantile function (every `ceil(n / 2^16)`-th one for
    /// larger samples).
    pub fn for_sample_size(n: usize) -> Self {
        let mut g =
            Self::tail_refined(DEFAULT_GRID_POINTS, DEFAULT_TAIL_DEPTH).expect("default grid");
        g.add_jumps(n);
        g
    }

    pub fn add_jumps(&mut self, n: usize) {
        if n < 2 {
            return;
        }
        let stride = n.div_ceil(MAX_JUMP_POINTS).max(1);
        self.points
            .extend((stride..n).step_by(stride).map(|k| k as f64 / n as f64));
        self.normalise();
    }

    /// Adds arbitrary points (clipped to the open unit interval).
    pub fn with_points(mut self, extra: &[f64]) -> Self {
        self.points
            .extend(extra.iter().copied().filter(|y| *y > 0.0 && *y < 1.0));
        self.normalise();
        self
    }

    fn normalise(&mut self) {
        self.points.retain(|y| *y > 0.0 && *y < 1.0);
        self.points.sort_by(f64::total_cmp);
        self.points.dedup();
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}
