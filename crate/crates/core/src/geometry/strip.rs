use serde::{Deserialize, Serialize};

use crate::error::{dim_err, Error, Result};
use crate::geometry::Interval;
use crate::numerics::{dot, norm1, Lu, Matrix};

/// `{x : |p'x - c| <= 1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Strip {
    pub normal: Vec<f64>,
    pub center: f64,
}

impl Strip {
    pub fn new(normal: Vec<f64>, center: f64) -> Result<Self> {
        if normal.iter().all(|v| *v == 0.0) {
            return Err(Error::InvalidArgument("strip normal must be nonzero".into()));
        }
        Ok(Self { normal, center })
    }

    /// Strip `{x : lo <= v'x <= hi}` rescaled to unit half-width.
    pub fn from_bounds(v: &[f64], bounds: Interval) -> Result<Self> {
        let hw = bounds.radius();
        if !(hw > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "strip needs positive half-width, got {hw}"
            )));
        }
        Self::new(v.iter().map(|x| x / hw).collect(), bounds.center() / hw)
    }

    pub fn dim(&self) -> usize {
        self.normal.len()
    }

    /// Range of `p'x` over the strip.
    pub fn bounds(&self) -> Interval {
        Interval::centered(self.center, 1.0)
    }

    pub fn residual(&self, x: &[f64]) -> f64 {
        dot(&self.normal, x) - self.center
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.residual(x).abs() <= 1.0 + tol
    }

    pub fn translate(&self, t: &[f64]) -> Strip {
        Strip {
            normal: self.normal.clone(),
            center: self.center + dot(&self.normal, t),
        }
    }
}

/// Sense of a half-space `{x : v'x <= b}` or `{x : v'x > b}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    AtMost,
    Above,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalfSpace {
    pub normal: Vec<f64>,
    pub offset: f64,
    pub sense: Sense,
}

impl HalfSpace {
    pub fn new(normal: Vec<f64>, offset: f64, sense: Sense) -> Result<Self> {
        if normal.iter().all(|v| *v == 0.0) {
            return Err(Error::InvalidArgument(
                "half-space normal must be nonzero".into(),
            ));
        }
        Ok(Self {
            normal,
            offset,
            sense,
        })
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        let v = dot(&self.normal, x);
        match self.sense {
            Sense::AtMost => v <= self.offset + tol,
            Sense::Above => v >= self.offset - tol,
        }
    }

    /// Closes the open side against a known range of `v'x`, turning the
    /// half-space into a strip.
    pub fn clamp(&self, range: Interval) -> Result<Strip> {
        let bounds = match self.sense {
            Sense::AtMost => Interval::new(range.lo, self.offset.min(range.hi))?,
            Sense::Above => Interval::new(self.offset.max(range.lo), range.hi)?,
        };
        Strip::from_bounds(&self.normal, bounds)
    }
}

/// Image of a strip under `x -> A x + gamma G w`, `||w||_inf <= 1`.
///
/// The Minkowski sum is again a strip; the normal becomes `p'A^-1` and the
/// half-width grows by `gamma ||p'A^-1 G||_1`, after which both are rescaled
/// back to unit half-width.
pub fn strip_propagate(s: &Strip, a: &Matrix, g: &Matrix, gamma: f64) -> Result<Strip> {
    let lu = a.lu()?;
    strip_propagate_lu(s, &lu, g, gamma)
}

pub(crate) fn strip_propagate_lu(s: &Strip, a_lu: &Lu, g: &Matrix, gamma: f64) -> Result<Strip> {
    if g.rows() != s.dim() {
        return dim_err(format!("G has {} rows for a {}-dim strip", g.rows(), s.dim()));
    }
    if gamma < 0.0 {
        return Err(Error::InvalidArgument("gamma must be nonnegative".into()));
    }
    let mapped = a_lu.solve_transpose(&s.normal)?;
    let inflate = 1.0 + gamma * norm1(&g.vec_mul(&mapped));
    Strip::new(
        mapped.iter().map(|v| v / inflate).collect(),
        s.center / inflate,
    )
}
