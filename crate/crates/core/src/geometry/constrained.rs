use serde::{Deserialize, Serialize};

use crate::error::{dim_err, Error, Result};
use crate::geometry::zonotope::{budget, frame_reduce, CONTAINS_TOL};
use crate::geometry::{Interval, Strip, Zonotope};
use crate::numerics::{dot, Direction, LinearProgram, Matrix};

/// `{x_c + T a : ||a||_inf <= 1, A a = b}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstrainedZonotope {
    pub center: Vec<f64>,
    pub generators: Matrix,
    pub constraints: Matrix,
    pub rhs: Vec<f64>,
}

impl ConstrainedZonotope {
    pub fn new(center: Vec<f64>, generators: Matrix, constraints: Matrix, rhs: Vec<f64>) -> Result<Self> {
        if generators.rows() != center.len() {
            return dim_err("generator rows differ from the center length");
        }
        if constraints.rows() != rhs.len() {
            return dim_err("constraint rows differ from the rhs length");
        }
        let constraints = if constraints.rows() == 0 {
            Matrix::zeros(0, generators.cols())
        } else if constraints.cols() != generators.cols() {
            return dim_err("constraint and generator column counts differ");
        } else {
            constraints
        };
        Ok(Self {
            center,
            generators,
            constraints,
            rhs,
        })
    }

    pub fn from_zonotope(z: &Zonotope) -> Self {
        Self {
            center: z.center.clone(),
            generators: z.generators.clone(),
            constraints: Matrix::zeros(0, z.num_generators()),
            rhs: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn num_generators(&self) -> usize {
        self.generators.cols()
    }

    pub fn num_constraints(&self) -> usize {
        self.rhs.len()
    }

    /// `(m - n_c) / n`.
    pub fn order(&self) -> f64 {
        (self.num_generators() as f64 - self.num_constraints() as f64) / self.dim() as f64
    }

    /// The zonotope obtained by dropping all constraints; an outer bound.
    pub fn relax(&self) -> Zonotope {
        Zonotope {
            center: self.center.clone(),
            generators: self.generators.clone(),
        }
    }

    fn program(&self, objective: Vec<f64>) -> Result<LinearProgram> {
        LinearProgram::unit_box(objective, self.constraints.clone(), self.rhs.clone())
    }

    /// `[min v'x, max v'x]` by two LPs.
    pub fn width_along(&self, v: &[f64]) -> Result<Interval> {
        if v.len() != self.dim() {
            return dim_err("direction length differs from the set dimension");
        }
        let base = dot(v, &self.center);
        let lp = self.program(self.generators.vec_mul(v))?;
        let hi = lp.solve(Direction::Maximize)?.value;
        let lo = lp.solve(Direction::Minimize)?.value;
        Ok(Interval {
            lo: base + lo.min(hi),
            hi: base + hi.max(lo),
        })
    }

    pub fn interval_hull(&self) -> Result<Vec<Interval>> {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                self.width_along(&e)
            })
            .collect()
    }

    /// Volume of the interval hull, an upper bound on the true volume.
    pub fn hull_volume(&self) -> Result<f64> {
        Ok(self.interval_hull()?.iter().map(Interval::width).product())
    }

    pub fn is_empty(&self) -> bool {
        self.num_constraints() > 0
            && matches!(
                self.program(vec![0.0; self.num_generators()])
                    .and_then(|lp| lp.solve(Direction::Minimize)),
                Err(Error::Infeasible)
            )
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.contains_tol(x, CONTAINS_TOL)
    }

    pub fn contains_tol(&self, x: &[f64], tol: f64) -> bool {
        if x.len() != self.dim() {
            return false;
        }
        let m = self.num_generators();
        let eq = self
            .generators
            .vcat(&self.constraints)
            .expect("column counts agree");
        let mut rhs: Vec<f64> = x.iter().zip(&self.center).map(|(a, b)| a - b).collect();
        rhs.extend_from_slice(&self.rhs);
        let bound = 1.0 + tol;
        LinearProgram::new(vec![0.0; m], eq, rhs, vec![-bound; m], vec![bound; m])
            .and_then(|lp| lp.solve(Direction::Minimize))
            .is_ok()
    }

    pub fn translate(&self, t: &[f64]) -> ConstrainedZonotope {
        ConstrainedZonotope {
            center: self.center.iter().zip(t).map(|(c, s)| c + s).collect(),
            ..self.clone()
        }
    }

    /// Exact image `A Z + delta_w G B_inf`; constraints get zero columns
    /// for the new generators.
    pub fn predict(&self, a: &Matrix, g: &Matrix, delta_w: f64) -> Result<ConstrainedZonotope> {
        let z = self.relax().predict(a, g, delta_w)?;
        let extra = z.num_generators() - self.num_generators();
        Ok(ConstrainedZonotope {
            center: z.center,
            generators: z.generators,
            constraints: self.constraints.pad_columns(extra),
            rhs: self.rhs.clone(),
        })
    }

    /// Exact intersection with `|p'x - c| <= 1`: a new coefficient `beta`
    /// with `p'T a - beta = c - p'x_c`.
    pub fn intersect_strip(&self, s: &Strip) -> Result<ConstrainedZonotope> {
        if s.dim() != self.dim() {
            return dim_err("strip dimension differs from the constrained zonotope");
        }
        let mut row = self.generators.vec_mul(&s.normal);
        row.push(-1.0);
        let mut rhs = s.center - dot(&s.normal, &self.center);
        let scale = row.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        row.iter_mut().for_each(|v| *v /= scale);
        rhs /= scale;

        let generators = self.generators.pad_columns(1);
        let constraints = self
            .constraints
            .pad_columns(1)
            .vcat(&Matrix::row_vector(&row))?;
        let mut b = self.rhs.clone();
        b.push(rhs);
        ConstrainedZonotope::new(self.center.clone(), generators, constraints, b)
    }

    /// Eliminates constraints until at most `max_constraints` remain, then
    /// reduces generators so that the order is at most `max_order`.
    pub fn reduce(&self, max_order: f64, max_constraints: usize) -> Result<ConstrainedZonotope> {
        let n = self.dim();
        let target = budget(max_order, n)?;
        let mut cz = self.drop_null_constraints();
        while cz.num_constraints() > max_constraints {
            cz = cz.eliminate_one()?;
        }
        let nc = cz.num_constraints();
        if cz.num_generators() <= target + nc {
            return Ok(cz);
        }
        let lifted = cz.generators.vcat(&cz.constraints)?;
        let reduced = frame_reduce(&lifted, target + nc);
        let rows = reduced.to_rows();
        let generators = Matrix::from_rows(&rows[..n])?;
        let constraints = if nc == 0 {
            Matrix::zeros(0, reduced.cols())
        } else {
            Matrix::from_rows(&rows[n..])?
        };
        ConstrainedZonotope::new(cz.center, generators, constraints, cz.rhs)
    }

    fn drop_null_constraints(&self) -> ConstrainedZonotope {
        let scale = self.constraints.max_abs().max(1.0);
        let keep: Vec<usize> = (0..self.num_constraints())
            .filter(|&i| {
                self.constraints.row(i).iter().any(|v| v.abs() > 1e-12 * scale)
            })
            .collect();
        if keep.len() == self.num_constraints() {
            return self.clone();
        }
        let rows: Vec<Vec<f64>> = keep.iter().map(|&i| self.constraints.row(i).to_vec()).collect();
        let constraints = if rows.is_empty() {
            Matrix::zeros(0, self.num_generators())
        } else {
            Matrix::from_rows(&rows).expect("rows share a length")
        };
        ConstrainedZonotope {
            center: self.center.clone(),
            generators: self.generators.clone(),
            constraints,
            rhs: keep.iter().map(|&i| self.rhs[i]).collect(),
        }
    }

    /// Drops the box bound of one coefficient and solves a constraint for
    /// it. Which constraint is used does not change the set, so only the
    /// coefficient is chosen: the one whose relaxation grows the summed
    /// interval-hull width least.
    fn eliminate_one(&self) -> Result<ConstrainedZonotope> {
        let m = self.num_generators();
        let nc = self.num_constraints();
        let unit = vec![Interval { lo: -1.0, hi: 1.0 }; m];
        let base = self.relaxed_hull_width(None)?;
        let mut best: Option<(f64, usize, usize)> = None;
        for j in 0..m {
            let col: Vec<f64> = (0..nc).map(|i| self.constraints[(i, j)]).collect();
            let Some(i) = pivot_row(&self.constraints, &col) else {
                continue;
            };
            // An outer bound of the relaxed range from every row holding a_j.
            let mut r = Interval { lo: f64::NEG_INFINITY, hi: f64::INFINITY };
            for (k, &a) in col.iter().enumerate() {
                if a != 0.0 {
                    let ri = implied_range(self.constraints.row(k), self.rhs[k], j, &unit);
                    r = Interval { lo: r.lo.max(ri.lo), hi: r.hi.min(ri.hi) };
                }
            }
            let growth = if r.lo >= -1.0 && r.hi <= 1.0 {
                0.0
            } else {
                // A wide relaxed bound can defeat the simplex tolerances;
                // such a candidate is ranked last.
                match self.relaxed_hull_width(Some((j, r))) {
                    Ok(w) => w - base,
                    Err(Error::Infeasible | Error::IterationLimit) => f64::INFINITY,
                    Err(e) => return Err(e),
                }
            };
            if best.map_or(true, |(g, _, _)| growth < g) {
                best = Some((growth, i, j));
            }
            if growth <= 0.0 {
                break;
            }
        }
        let (_, i, j) = best.ok_or_else(|| Error::InvalidArgument("no constraint with a usable pivot".into()))?;
        self.substitute(i, j)
    }

    /// Summed interval-hull width, optionally with the bound on `a_j`
    /// widened to `outer`.
    fn relaxed_hull_width(&self, relax: Option<(usize, Interval)>) -> Result<f64> {
        let m = self.num_generators();
        let mut lower = vec![-1.0; m];
        let mut upper = vec![1.0; m];
        if let Some((j, outer)) = relax {
            lower[j] = outer.lo.min(-1.0);
            upper[j] = outer.hi.max(1.0);
        }
        let mut total = 0.0;
        for r in 0..self.dim() {
            let lp = LinearProgram::new(
                self.generators.row(r).to_vec(),
                self.constraints.clone(),
                self.rhs.clone(),
                lower.clone(),
                upper.clone(),
            )?;
            total += lp.solve(Direction::Maximize)?.value - lp.solve(Direction::Minimize)?.value;
        }
        Ok(total)
    }

    /// Solves constraint `i` for `a_j` and substitutes it everywhere.
    fn substitute(&self, i: usize, j: usize) -> Result<ConstrainedZonotope> {
        let n = self.dim();
        let m = self.num_generators();
        let row = self.constraints.row(i).to_vec();
        let piv = row[j];
        let bi = self.rhs[i];

        let tj = self.generators.column(j);
        let mut gens = self.generators.clone();
        let mut center = self.center.clone();
        for r in 0..n {
            let f = tj[r] / piv;
            center[r] += f * bi;
            for k in 0..m {
                gens[(r, k)] -= f * row[k];
            }
        }
        let mut cons = self.constraints.clone();
        let mut rhs = self.rhs.clone();
        for r in 0..self.num_constraints() {
            if r == i {
                continue;
            }
            let f = cons[(r, j)] / piv;
            if f == 0.0 {
                continue;
            }
            rhs[r] -= f * bi;
            for k in 0..m {
                cons[(r, k)] -= f * row[k];
            }
        }
        let cons = cons.remove_row(i).remove_column(j);
        rhs.remove(i);
        let gens = gens.remove_column(j);
        let cons = if rhs.is_empty() {
            Matrix::zeros(0, gens.cols())
        } else {
            cons
        };
        Ok(ConstrainedZonotope::new(center, gens, cons, rhs)?.drop_null_constraints())
    }
}

/// Row with the largest entry in `col` relative to the row's own largest
/// entry, ignoring entries below `1e-6` of that.
fn pivot_row(constraints: &Matrix, col: &[f64]) -> Option<usize> {
    let mut best: Option<(f64, usize)> = None;
    for (i, &a) in col.iter().enumerate() {
        let rmax = constraints.row(i).iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        let rel = if rmax > 0.0 { a.abs() / rmax } else { 0.0 };
        if rel > 1e-6 && best.map_or(true, |(b, _)| rel > b) {
            best = Some((rel, i));
        }
    }
    best.map(|(_, i)| i)
}

/// Range of `(b - sum_{k != j} row_k a_k) / row_j` over `a_k in e_k`.
fn implied_range(row: &[f64], b: f64, j: usize, e: &[Interval]) -> Interval {
    let mut acc = Interval::point(b);
    for (k, (&rk, ek)) in row.iter().zip(e).enumerate() {
        if k == j || rk == 0.0 {
            continue;
        }
        let term = ek.affine(-rk, 0.0);
        acc = Interval {
            lo: acc.lo + term.lo,
            hi: acc.hi + term.hi,
        };
    }
    acc.affine(1.0 / row[j], 0.0)
}

pub fn cz_intersect_strip(cz: &ConstrainedZonotope, s: &Strip) -> Result<ConstrainedZonotope> {
    cz.intersect_strip(s)
}
