use serde::{Deserialize, Serialize};

use crate::error::{dim_err, Result};
use crate::geometry::zonotope::CONTAINS_TOL;
use crate::geometry::{ConstrainedZonotope, Interval, Parallelotope, Zonotope};
use crate::numerics::{norm1, norm2, Matrix};

/// Any of the supported set representations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Region {
    Interval(Interval),
    Parallelotope(Parallelotope),
    Zonotope(Zonotope),
    Constrained(ConstrainedZonotope),
}

/// Volume, with a flag set when only an upper bound is available.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Volume {
    pub value: f64,
    pub upper_bound: bool,
}

impl Region {
    pub fn dim(&self) -> usize {
        match self {
            Region::Interval(_) => 1,
            Region::Parallelotope(p) => p.dim(),
            Region::Zonotope(z) => z.dim(),
            Region::Constrained(c) => c.dim(),
        }
    }

    pub fn width_along(&self, v: &[f64]) -> Result<Interval> {
        match self {
            Region::Interval(iv) => {
                if v.len() != 1 {
                    return dim_err("interval region takes scalar directions");
                }
                Ok(iv.affine(v[0], 0.0))
            }
            Region::Parallelotope(p) => p.width_along(v),
            Region::Zonotope(z) => z.width_along(v),
            Region::Constrained(c) => c.width_along(v),
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Region::Interval(iv) => x.len() == 1 && iv.contains(x[0], CONTAINS_TOL),
            Region::Parallelotope(p) => p.contains(x, CONTAINS_TOL),
            Region::Zonotope(z) => z.contains(x),
            Region::Constrained(c) => c.contains(x),
        }
    }

    pub fn interval_hull(&self) -> Result<Vec<Interval>> {
        match self {
            Region::Interval(iv) => Ok(vec![*iv]),
            Region::Parallelotope(p) => Ok(p.to_zonotope().interval_hull()),
            Region::Zonotope(z) => Ok(z.interval_hull()),
            Region::Constrained(c) => c.interval_hull(),
        }
    }

    pub fn volume(&self) -> Result<Volume> {
        let exact = |value| Volume {
            value,
            upper_bound: false,
        };
        Ok(match self {
            Region::Interval(iv) => exact(iv.width()),
            Region::Parallelotope(p) => exact(p.volume()),
            Region::Zonotope(z) => exact(z.volume()),
            Region::Constrained(c) => Volume {
                value: c.hull_volume()?,
                upper_bound: true,
            },
        })
    }

    /// Euclidean size proxy: exact radius for intervals and parallelotopes,
    /// radius of the interval hull otherwise.
    pub fn radius(&self) -> Result<f64> {
        Ok(match self {
            Region::Interval(iv) => iv.radius(),
            Region::Parallelotope(p) => p.radius(),
            _ => {
                let r: Vec<f64> = self.interval_hull()?.iter().map(Interval::radius).collect();
                norm2(&r)
            }
        })
    }

    /// Center of the interval hull.
    pub fn hull_center(&self) -> Result<Vec<f64>> {
        Ok(self.interval_hull()?.iter().map(Interval::center).collect())
    }

    /// `A R + delta_w G B_inf` (outer bound for parallelotopes, exact
    /// otherwise).
    pub fn affine_predict(&self, a: &Matrix, g: &Matrix, delta_w: f64) -> Result<Region> {
        match self {
            Region::Interval(iv) => {
                if a.rows() != 1 || a.cols() != 1 || g.rows() != 1 {
                    return dim_err("interval prediction needs scalar dynamics");
                }
                Ok(Region::Interval(
                    iv.affine(a[(0, 0)], 0.0).inflate(delta_w * norm1(g.row(0))),
                ))
            }
            Region::Parallelotope(p) => p.predict(a, g, delta_w).map(Region::Parallelotope),
            Region::Zonotope(z) => z.predict(a, g, delta_w).map(Region::Zonotope),
            Region::Constrained(c) => c.predict(a, g, delta_w).map(Region::Constrained),
        }
    }

    pub fn translate(&self, t: &[f64]) -> Region {
        match self {
            Region::Interval(iv) => Region::Interval(iv.translate(t[0])),
            Region::Parallelotope(p) => Region::Parallelotope(p.translate(t)),
            Region::Zonotope(z) => Region::Zonotope(z.translate(t)),
            Region::Constrained(c) => Region::Constrained(c.translate(t)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_prediction_matches_first_order_example() {
        let r = Region::Interval(Interval::new(-5.0, 5.0).unwrap());
        let p = r
            .affine_predict(&Matrix::diag(&[2.0]), &Matrix::diag(&[1.0]), 1.0)
            .unwrap();
        assert_eq!(p, Region::Interval(Interval::new(-11.0, 11.0).unwrap()));
        let p = r
            .affine_predict(&Matrix::diag(&[-0.5]), &Matrix::diag(&[1.0]), 1.0)
            .unwrap();
        assert_eq!(p, Region::Interval(Interval::new(-3.5, 3.5).unwrap()));
    }

    #[test]
    fn centers_are_members() {
        let z = Zonotope::new(
            vec![1.0, -2.0],
            Matrix::from_rows(&[vec![1.0, 0.3, 0.0], vec![0.2, 1.0, 0.5]]).unwrap(),
        )
        .unwrap();
        let regions = [
            Region::Interval(Interval::new(2.0, 3.0).unwrap()),
            Region::Parallelotope(Parallelotope::from_box(vec![1.0, -2.0], &[0.5, 2.0]).unwrap()),
            Region::Zonotope(z.clone()),
            Region::Constrained(ConstrainedZonotope::from_zonotope(&z)),
        ];
        for r in &regions {
            let c = r.hull_center().unwrap();
            assert!(r.contains(&c), "{r:?}");
        }
    }

    #[test]
    fn constrained_volume_is_flagged() {
        let z = Zonotope::from_box(vec![0.0, 0.0], &[1.0, 2.0]).unwrap();
        let v = Region::Constrained(ConstrainedZonotope::from_zonotope(&z)).volume().unwrap();
        assert!(v.upper_bound);
        assert!((v.value - 8.0).abs() < 1e-9);
        assert!(!Region::Zonotope(z).volume().unwrap().upper_bound);
    }
}
