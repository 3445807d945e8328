//! Two-phase dense simplex for box-bounded programs
//!
//! ```text
//!     min / max  c' a   s.t.  E a = f,   lo <= a <= hi
//! ```
//!
//! Variables are shifted to `y = a - lo >= 0` and every upper bound becomes an
//! explicit slack row. Pivot selection follows Bland's rule in both phases, so
//! the method terminates on degenerate problems without perturbation.

use crate::error::{dim_err, Error, Result};
use crate::numerics::{Matrix, PIVOT_EPS};

const OPT_EPS: f64 = 1e-11;
const FEAS_EPS: f64 = 1e-9;
const MAX_PIVOTS: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Minimize,
    Maximize,
}

#[derive(Clone, Debug)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub eq_matrix: Matrix,
    pub eq_rhs: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub value: f64,
    pub point: Vec<f64>,
}

impl LinearProgram {
    /// Program over the unit box `||a||_inf <= 1`.
    pub fn unit_box(objective: Vec<f64>, eq_matrix: Matrix, eq_rhs: Vec<f64>) -> Result<Self> {
        let n = objective.len();
        Self::new(objective, eq_matrix, eq_rhs, vec![-1.0; n], vec![1.0; n])
    }

    pub fn new(
        objective: Vec<f64>,
        eq_matrix: Matrix,
        eq_rhs: Vec<f64>,
        lower: Vec<f64>,
        upper: Vec<f64>,
    ) -> Result<Self> {
        let n = objective.len();
        if eq_matrix.cols() != n && eq_matrix.rows() > 0 {
            return dim_err(format!(
                "constraint matrix has {} columns for {n} variables",
                eq_matrix.cols()
            ));
        }
        if eq_matrix.rows() != eq_rhs.len() {
            return dim_err("constraint rows and rhs length differ");
        }
        if lower.len() != n || upper.len() != n {
            return dim_err("bound vectors must match the variable count");
        }
        let eq_matrix = if eq_matrix.rows() == 0 {
            Matrix::zeros(0, n)
        } else {
            eq_matrix
        };
        Ok(Self {
            objective,
            eq_matrix,
            eq_rhs,
            lower,
            upper,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn solve(&self, direction: Direction) -> Result<LpSolution> {
        solve_lp(self, direction)
    }
}

struct Tableau {
    rows: usize,
    cols: usize,
    /// `(rows + 1) x (cols + 1)`; last row holds reduced costs, last column
    /// the right-hand side.
    t: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    #[inline]
    fn at(&self, r: usize, c: usize) -> f64 {
        self.t[r * (self.cols + 1) + c]
    }

    #[inline]
    fn rhs(&self, r: usize) -> f64 {
        self.at(r, self.cols)
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let w = self.cols + 1;
        let p = self.t[pr * w + pc];
        for c in 0..w {
            self.t[pr * w + c] /= p;
        }
        self.t[pr * w + pc] = 1.0;
        for r in 0..=self.rows {
            if r == pr {
                continue;
            }
            let f = self.t[r * w + pc];
            if f == 0.0 {
                continue;
            }
            for c in 0..w {
                self.t[r * w + c] -= f * self.t[pr * w + c];
            }
            self.t[r * w + pc] = 0.0;
        }
        self.basis[pr] = pc;
    }

    /// Loads reduced costs for `cost` given the current basis.
    fn set_costs(&mut self, cost: &[f64]) {
        let w = self.cols + 1;
        let obj = self.rows * w;
        for c in 0..w {
            self.t[obj + c] = if c < self.cols { cost[c] } else { 0.0 };
        }
        for r in 0..self.rows {
            let cb = cost[self.basis[r]];
            if cb == 0.0 {
                continue;
            }
            for c in 0..w {
                self.t[obj + c] -= cb * self.t[r * w + c];
            }
        }
    }

    /// Minimizes the loaded cost row over columns marked in `allowed`.
    fn optimize(&mut self, allowed: &[bool]) -> Result<()> {
        for _ in 0..MAX_PIVOTS {
            let entering = (0..self.cols).find(|&c| allowed[c] && self.at(self.rows, c) < -OPT_EPS);
            let Some(pc) = entering else {
                return Ok(());
            };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.rows {
                let a = self.at(r, pc);
                if a <= PIVOT_EPS {
                    continue;
                }
                let ratio = self.rhs(r).max(0.0) / a;
                leave = match leave {
                    None => Some((r, ratio)),
                    Some((br, bratio)) => {
                        if ratio < bratio - 1e-14 * bratio.abs().max(1.0)
                            || (ratio <= bratio + 1e-14 * bratio.abs().max(1.0)
                                && self.basis[r] < self.basis[br])
                        {
                            Some((r, ratio))
                        } else {
                            Some((br, bratio))
                        }
                    }
                };
            }
            match leave {
                Some((pr, _)) => self.pivot(pr, pc),
                // Box bounds make the program bounded; this only happens
                // with wildly inconsistent input.
                None => return Err(Error::Infeasible),
            }
        }
        Err(Error::IterationLimit)
    }
}

/// Optimizes a linear objective over `{E a = f, lo <= a <= hi}`.
pub fn solve_lp(lp: &LinearProgram, direction: Direction) -> Result<LpSolution> {
    let nv = lp.num_vars();
    let ne = lp.eq_matrix.rows();
    let width: Vec<f64> = lp.upper.iter().zip(&lp.lower).map(|(u, l)| u - l).collect();
    if width.iter().any(|w| *w < 0.0) {
        return Err(Error::Infeasible);
    }

    // Columns: y (nv) | slack (nv) | artificial (ne)
    let rows = ne + nv;
    let cols = 2 * nv + ne;
    let w = cols + 1;
    let mut t = vec![0.0; (rows + 1) * w];
    let mut basis = vec![0; rows];
    for r in 0..ne {
        let row = lp.eq_matrix.row(r);
        let shift: f64 = row.iter().zip(&lp.lower).map(|(a, l)| a * l).sum();
        let rhs = lp.eq_rhs[r] - shift;
        let s = if rhs < 0.0 { -1.0 } else { 1.0 };
        for j in 0..nv {
            t[r * w + j] = s * row[j];
        }
        t[r * w + 2 * nv + r] = 1.0;
        t[r * w + cols] = s * rhs;
        basis[r] = 2 * nv + r;
    }
    for i in 0..nv {
        let r = ne + i;
        t[r * w + i] = 1.0;
        t[r * w + nv + i] = 1.0;
        t[r * w + cols] = width[i];
        basis[r] = nv + i;
    }
    let mut tab = Tableau {
        rows,
        cols,
        t,
        basis,
    };

    if ne > 0 {
        let mut phase1 = vec![0.0; cols];
        phase1[2 * nv..].iter_mut().for_each(|c| *c = 1.0);
        tab.set_costs(&phase1);
        tab.optimize(&vec![true; cols])?;
        let infeas = -tab.at(rows, cols);
        let scale = 1.0 + lp.eq_rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if infeas > FEAS_EPS * scale {
            return Err(Error::Infeasible);
        }
        // Drive zero-level artificials out of the basis.
        for r in 0..rows {
            if tab.basis[r] < 2 * nv {
                continue;
            }
            let pc = (0..2 * nv)
                .filter(|&c| tab.at(r, c).abs() > PIVOT_EPS)
                .max_by(|&a, &b| tab.at(r, a).abs().total_cmp(&tab.at(r, b).abs()));
            if let Some(pc) = pc {
                tab.pivot(r, pc);
            }
            // Otherwise the row is redundant; the artificial stays basic at
            // zero and is never allowed to enter again.
        }
    }

    let sign = match direction {
        Direction::Minimize => 1.0,
        Direction::Maximize => -1.0,
    };
    let mut cost = vec![0.0; cols];
    for j in 0..nv {
        cost[j] = sign * lp.objective[j];
    }
    tab.set_costs(&cost);
    let allowed: Vec<bool> = (0..cols).map(|c| c < 2 * nv).collect();
    tab.optimize(&allowed)?;

    let mut y = vec![0.0; nv];
    for r in 0..rows {
        let b = tab.basis[r];
        if b < nv {
            y[b] = tab.rhs(r);
        }
    }
    let point: Vec<f64> = y
        .iter()
        .zip(&lp.lower)
        .zip(&lp.upper)
        .map(|((yi, l), u)| (l + yi).clamp(*l, *u))
        .collect();
    let value = point.iter().zip(&lp.objective).map(|(a, c)| a * c).sum();
    Ok(LpSolution { value, point })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_vertex() {
        let lp = LinearProgram::unit_box(vec![1.0, 0.0], Matrix::zeros(0, 2), vec![]).unwrap();
        let s = lp.solve(Direction::Maximize).unwrap();
        assert!((s.value - 1.0).abs() < 1e-12);
        let s = lp.solve(Direction::Minimize).unwrap();
        assert!((s.value + 1.0).abs() < 1e-12);
    }

    #[test]
    fn equality_on_diagonal() {
        let e = Matrix::from_rows(&[vec![1.0, -1.0]]).unwrap();
        let lp = LinearProgram::unit_box(vec![1.0, 1.0], e, vec![0.0]).unwrap();
        let s = lp.solve(Direction::Maximize).unwrap();
        assert!((s.value - 2.0).abs() < 1e-12);
        assert!((s.point[0] - 1.0).abs() < 1e-12 && (s.point[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bound_violation_is_infeasible() {
        let e = Matrix::from_rows(&[vec![1.0]]).unwrap();
        let lp = LinearProgram::unit_box(vec![1.0], e, vec![2.0]).unwrap();
        assert_eq!(lp.solve(Direction::Maximize).unwrap_err(), Error::Infeasible);
    }

    #[test]
    fn redundant_equalities_are_tolerated() {
        let e = Matrix::from_rows(&[vec![1.0, 1.0, 0.0], vec![2.0, 2.0, 0.0]]).unwrap();
        let lp = LinearProgram::unit_box(vec![0.0, 1.0, 1.0], e, vec![0.5, 1.0]).unwrap();
        let s = lp.solve(Direction::Maximize).unwrap();
        assert!((s.value - 2.0).abs() < 1e-12, "{s:?}");
    }

    #[test]
    fn dimension_checks() {
        assert!(LinearProgram::unit_box(vec![1.0], Matrix::zeros(1, 2), vec![0.0]).is_err());
        assert!(LinearProgram::unit_box(vec![1.0], Matrix::zeros(1, 1), vec![]).is_err());
    }
}
