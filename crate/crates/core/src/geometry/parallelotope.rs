use serde::{Deserialize, Serialize};

use crate::error::{dim_err, Error, Result};
use crate::geometry::strip::strip_propagate_lu;
use crate::geometry::support::{box_slab_range, slab_range};
use crate::geometry::{Interval, Strip, Zonotope};
use crate::numerics::{box_vertices, dot, norm1, norm2, Matrix, PIVOT_EPS};

/// `{x : ||P x - c||_inf <= 1}` with the equivalent generator form
/// `x_c + T a`, `T = P^-1`, `x_c = T c`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ParallelotopeRepr", into = "ParallelotopeRepr")]
pub struct Parallelotope {
    shape: Matrix,
    offset: Vec<f64>,
    center: Vec<f64>,
    generators: Matrix,
}

#[derive(Serialize, Deserialize)]
struct ParallelotopeRepr {
    shape: Matrix,
    offset: Vec<f64>,
}

impl TryFrom<ParallelotopeRepr> for Parallelotope {
    type Error = Error;
    fn try_from(r: ParallelotopeRepr) -> Result<Self> {
        Parallelotope::new(r.shape, r.offset)
    }
}

impl From<Parallelotope> for ParallelotopeRepr {
    fn from(p: Parallelotope) -> Self {
        ParallelotopeRepr {
            shape: p.shape,
            offset: p.offset,
        }
    }
}

impl Parallelotope {
    pub fn new(shape: Matrix, offset: Vec<f64>) -> Result<Self> {
        if !shape.is_square() || shape.rows() != offset.len() {
            return dim_err(format!(
                "shape {}x{} with offset of length {}",
                shape.rows(),
                shape.cols(),
                offset.len()
            ));
        }
        let generators = shape.inverse()?;
        let center = generators.mul_vec(&offset);
        Ok(Self {
            shape,
            offset,
            center,
            generators,
        })
    }

    /// Parallelotope `x_c + T a` from a nonsingular generator matrix.
    pub fn from_generators(center: Vec<f64>, generators: Matrix) -> Result<Self> {
        if !generators.is_square() || generators.rows() != center.len() {
            return dim_err("parallelotope generators must be n x n");
        }
        let shape = generators.inverse()?;
        let offset = shape.mul_vec(&center);
        Ok(Self {
            shape,
            offset,
            center,
            generators,
        })
    }

    /// The `n` strips whose intersection is this set.
    pub fn from_strips(strips: &[Strip]) -> Result<Self> {
        let n = strips.len();
        if strips.iter().any(|s| s.dim() != n) {
            return dim_err("need n strips in R^n");
        }
        let rows: Vec<Vec<f64>> = strips.iter().map(|s| s.normal.clone()).collect();
        Self::new(
            Matrix::from_rows(&rows)?,
            strips.iter().map(|s| s.center).collect(),
        )
    }

    pub fn from_box(center: Vec<f64>, radii: &[f64]) -> Result<Self> {
        if radii.iter().any(|r| !(*r > 0.0)) {
            return Err(Error::InvalidArgument("box radii must be positive".into()));
        }
        Self::from_generators(center, Matrix::diag(radii))
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn shape(&self) -> &Matrix {
        &self.shape
    }

    pub fn offset(&self) -> &[f64] {
        &self.offset
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn generators(&self) -> &Matrix {
        &self.generators
    }

    pub fn strip(&self, i: usize) -> Strip {
        Strip {
            normal: self.shape.row(i).to_vec(),
            center: self.offset[i],
        }
    }

    pub fn strips(&self) -> Vec<Strip> {
        (0..self.dim()).map(|i| self.strip(i)).collect()
    }

    pub fn to_zonotope(&self) -> Zonotope {
        Zonotope::new(self.center.clone(), self.generators.clone())
            .expect("parallelotope generators are n x n")
    }

    /// Euclidean radius about the center: `max_{w in B_inf} ||T w||`.
    pub fn radius(&self) -> f64 {
        box_vertices(self.dim())
            .map(|w| norm2(&self.generators.mul_vec(&w)))
            .fold(0.0, f64::max)
    }

    pub fn width_along(&self, v: &[f64]) -> Result<Interval> {
        if v.len() != self.dim() {
            return dim_err("direction length differs from the set dimension");
        }
        Ok(Interval::centered(
            dot(v, &self.center),
            norm1(&self.generators.vec_mul(v)),
        ))
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        x.len() == self.dim()
            && self
                .shape
                .mul_vec(x)
                .iter()
                .zip(&self.offset)
                .all(|(px, c)| (px - c).abs() <= 1.0 + tol)
    }

    /// `2^n |det T|`.
    pub fn volume(&self) -> f64 {
        let det = self.generators.det().expect("square by construction");
        2f64.powi(self.dim() as i32) * det.abs()
    }

    pub fn translate(&self, t: &[f64]) -> Parallelotope {
        let shift = self.shape.mul_vec(t);
        Parallelotope {
            shape: self.shape.clone(),
            offset: self.offset.iter().zip(&shift).map(|(c, s)| c + s).collect(),
            center: self.center.iter().zip(t).map(|(c, s)| c + s).collect(),
            generators: self.generators.clone(),
        }
    }

    /// Outer parallelotope of `A P + delta_w G B_inf`: each defining strip is
    /// mapped and inflated exactly.
    pub fn predict(&self, a: &Matrix, g: &Matrix, delta_w: f64) -> Result<Parallelotope> {
        let n = self.dim();
        if a.rows() != n || a.cols() != n || g.rows() != n {
            return dim_err("dynamics do not match the parallelotope dimension");
        }
        let lu = a.lu()?;
        let strips = (0..n)
            .map(|i| strip_propagate_lu(&self.strip(i), &lu, g, delta_w))
            .collect::<Result<Vec<_>>>()?;
        Parallelotope::from_strips(&strips)
    }

    /// Minimum-volume outer parallelotope of `P ∩ S` among the incumbent and
    /// the `n` single-strip substitutions, each tightened to the exact
    /// intersection.
    pub fn intersect_strip(&self, s: &Strip) -> Result<Parallelotope> {
        let n = self.dim();
        if s.dim() != n {
            return dim_err("strip dimension differs from the parallelotope");
        }
        let proj = self.width_along(&s.normal)?;
        let slab = s.bounds();
        if slab.contains_interval(&proj) {
            return Ok(self.clone());
        }
        // In generator coordinates the intersection is the box cut by
        // g'a in [slab - p'x_c].
        let g = self.generators.vec_mul(&s.normal);
        let px = dot(&s.normal, &self.center);
        let cut = Interval {
            lo: slab.lo - px,
            hi: slab.hi - px,
        };
        slab_range(&g, cut)?;

        // Tightened range of each of the n+1 candidate normals.
        let mut normals: Vec<Vec<f64>> = (0..n).map(|i| self.shape.row(i).to_vec()).collect();
        normals.push(s.normal.clone());
        let ranges = normals
            .iter()
            .map(|r| {
                let u = self.generators.vec_mul(r);
                let base = dot(r, &self.center);
                box_slab_range(&u, &g, cut).map(|iv| iv.translate(base))
            })
            .collect::<Result<Vec<_>>>()?;

        let candidate_rows = |swap: Option<usize>| -> Vec<usize> {
            (0..n)
                .map(|j| if Some(j) == swap { n } else { j })
                .collect()
        };
        // Volume up to the common 2^n factor: prod(width/2) / |det R|.
        let score = |rows: &[usize]| -> Option<f64> {
            let m = Matrix::from_rows(
                &rows.iter().map(|&r| normals[r].clone()).collect::<Vec<_>>(),
            )
            .ok()?;
            let det = m.det().ok()?.abs();
            let scale: f64 = rows.iter().map(|&r| norm2(&normals[r])).product();
            if det <= PIVOT_EPS * scale {
                return None;
            }
            let widths: f64 = rows.iter().map(|&r| ranges[r].radius()).product();
            Some(widths / det)
        };

        let mut best_rows = candidate_rows(None);
        let mut best = score(&best_rows).ok_or(Error::Singular)?;
        for i in 0..n {
            let rows = candidate_rows(Some(i));
            if let Some(v) = score(&rows) {
                if v < best * (1.0 - 1e-12) {
                    best = v;
                    best_rows = rows;
                }
            }
        }

        let strips = best_rows
            .iter()
            .map(|&r| {
                let iv = ranges[r];
                let floor = 1e-12 * (1.0 + iv.center().abs());
                let iv = if iv.radius() < floor {
                    Interval::centered(iv.center(), floor)
                } else {
                    iv
                };
                Strip::from_bounds(&normals[r], iv)
            })
            .collect::<Result<Vec<_>>>()?;
        Parallelotope::from_strips(&strips)
    }
}

pub fn par_radius(p: &Parallelotope) -> f64 {
    p.radius()
}

pub fn par_intersect_strip(p: &Parallelotope, s: &Strip) -> Result<Parallelotope> {
    p.intersect_strip(s)
}
