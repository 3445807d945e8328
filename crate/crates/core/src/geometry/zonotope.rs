use serde::{Deserialize, Serialize};

use crate::error::{dim_err, Error, Result};
use crate::geometry::{Interval, Strip};
use crate::numerics::{dot, for_each_combination, norm1, norm_inf, Direction, LinearProgram, Matrix};

/// Tolerance used by LP membership tests.
pub const CONTAINS_TOL: f64 = 1e-9;

/// How `lambda` is picked inside the one-parameter family of outer zonotopes
/// of a zonotope-strip intersection.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    Volume,
    Frobenius,
}

/// `{x_c + T a : ||a||_inf <= 1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Zonotope {
    pub center: Vec<f64>,
    pub generators: Matrix,
}

impl Zonotope {
    pub fn new(center: Vec<f64>, generators: Matrix) -> Result<Self> {
        if generators.rows() != center.len() {
            return dim_err(format!(
                "{} generator rows for a center of length {}",
                generators.rows(),
                center.len()
            ));
        }
        Ok(Self { center, generators })
    }

    pub fn from_box(center: Vec<f64>, radii: &[f64]) -> Result<Self> {
        if radii.len() != center.len() {
            return dim_err("box radii and center differ in length");
        }
        Self::new(center, Matrix::diag(radii))
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn num_generators(&self) -> usize {
        self.generators.cols()
    }

    pub fn order(&self) -> f64 {
        self.num_generators() as f64 / self.dim() as f64
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

    pub fn interval_hull(&self) -> Vec<Interval> {
        (0..self.dim())
            .map(|i| Interval::centered(self.center[i], norm1(self.generators.row(i))))
            .collect()
    }

    pub fn translate(&self, t: &[f64]) -> Zonotope {
        Zonotope {
            center: self.center.iter().zip(t).map(|(c, s)| c + s).collect(),
            generators: self.generators.clone(),
        }
    }

    /// Exact image `A Z + delta_w G B_inf`.
    pub fn predict(&self, a: &Matrix, g: &Matrix, delta_w: f64) -> Result<Zonotope> {
        if a.cols() != self.dim() || g.rows() != a.rows() {
            return dim_err("dynamics do not match the zonotope dimension");
        }
        let mapped = a.checked_mul(&self.generators)?;
        let generators = if delta_w > 0.0 {
            mapped.hcat(&g.scale(delta_w))?
        } else {
            mapped
        };
        Zonotope::new(a.mul_vec(&self.center), generators)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.contains_tol(x, CONTAINS_TOL)
    }

    /// LP feasibility of `T a = x - x_c`, `||a||_inf <= 1 + tol`.
    pub fn contains_tol(&self, x: &[f64], tol: f64) -> bool {
        if x.len() != self.dim() {
            return false;
        }
        let rhs: Vec<f64> = x.iter().zip(&self.center).map(|(a, b)| a - b).collect();
        let m = self.num_generators();
        if m == 0 {
            return norm_inf(&rhs) <= tol;
        }
        let bound = 1.0 + tol;
        LinearProgram::new(
            vec![0.0; m],
            self.generators.clone(),
            rhs,
            vec![-bound; m],
            vec![bound; m],
        )
        .and_then(|lp| lp.solve(Direction::Minimize))
        .is_ok()
    }

    /// `2^n * sum over n-column subsets of |det|`.
    pub fn volume(&self) -> f64 {
        let n = self.dim();
        let cols = columns(&self.generators);
        let mut buf = vec![0.0; n * n];
        let mut total = 0.0;
        for_each_combination(cols.len(), n, |s| total += subset_det(&cols, s, None, &mut buf).abs());
        2f64.powi(n as i32) * total
    }

    /// Outer zonotope of `Z ∩ S` from the family
    /// `Z(l) = {x_c + l (c - p'x_c) + [(I - l p')T, l] b}`.
    pub fn intersect_strip(&self, s: &Strip, criterion: Criterion) -> Result<Zonotope> {
        if s.dim() != self.dim() {
            return dim_err("strip dimension differs from the zonotope");
        }
        let proj = self.width_along(&s.normal)?;
        let slab = s.bounds();
        if slab.contains_interval(&proj) {
            return Ok(self.clone());
        }
        let tol = 1e-12 * (1.0 + proj.lo.abs().max(proj.hi.abs()));
        if slab.lo > proj.hi + tol || slab.hi < proj.lo - tol {
            return Err(Error::EmptySet(format!(
                "strip [{}, {}] misses the zonotope projection [{}, {}]",
                slab.lo, slab.hi, proj.lo, proj.hi
            )));
        }
        let u = self.generators.vec_mul(&s.normal);
        let uu = dot(&u, &u);
        if uu + 1.0 < 1e-12 {
            return Err(Error::DegenerateStrip);
        }
        let frob = scaled_vec(&self.generators.mul_vec(&u), 1.0 / (uu + 1.0));
        let lambda = match criterion {
            Criterion::Frobenius => frob,
            Criterion::Volume => self.min_volume_lambda(s, &u, frob),
        };
        Ok(self.family_member(s, &u, &lambda))
    }

    fn min_volume_lambda(&self, s: &Strip, u: &[f64], frob: Vec<f64>) -> Vec<f64> {
        let n = self.dim();
        let cols = columns(&self.generators);
        let m = cols.len();
        let mut buf = vec![0.0; n * n];

        // One pass over n-subsets gives the incumbent volume and, per
        // generator j, the sum of |det| over subsets containing j.
        let mut base = 0.0;
        let mut per_gen = vec![0.0; m];
        for_each_combination(m, n, |sub| {
            let d = subset_det(&cols, sub, None, &mut buf).abs();
            base += d;
            for &j in sub {
                per_gen[j] += d;
            }
        });

        // Volumes up to the common 2^n factor.
        let mut best = (base, vec![0.0; n]);
        for j in 0..m {
            if u[j].abs() > 1e-12 {
                let v = per_gen[j] / u[j].abs();
                if v < best.0 * (1.0 - 1e-12) {
                    best = (v, scaled_vec(&cols[j], 1.0 / u[j]));
                }
            }
        }
        let fv = family_volume(&cols, base, &s.normal, &frob, &mut buf);
        if fv < best.0 * (1.0 - 1e-12) {
            best = (fv, frob.clone());
        }
        if best.0 <= 0.0 {
            // Flat zonotope: every candidate has zero volume.
            return frob;
        }
        best.1
    }

    fn family_member(&self, s: &Strip, u: &[f64], lambda: &[f64]) -> Zonotope {
        let n = self.dim();
        let shift = s.center - dot(&s.normal, &self.center);
        let center: Vec<f64> = self
            .center
            .iter()
            .zip(lambda)
            .map(|(c, l)| c + l * shift)
            .collect();
        let m = self.num_generators();
        let mut cols: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
        let scale = self.generators.max_abs().max(norm_inf(lambda));
        for j in 0..m {
            let col: Vec<f64> = (0..n)
                .map(|i| self.generators[(i, j)] - lambda[i] * u[j])
                .collect();
            if norm_inf(&col) > 1e-14 * scale {
                cols.push(col);
            }
        }
        if norm_inf(lambda) > 0.0 {
            cols.push(lambda.to_vec());
        }
        Zonotope {
            center,
            generators: Matrix::from_columns(n, &cols).expect("columns have length n"),
        }
    }

    /// Frame-based Girard reduction to at most `floor(max_order * n)` generators.
    pub fn reduce_order(&self, max_order: f64) -> Result<Zonotope> {
        let n = self.dim();
        let target = budget(max_order, n)?;
        if self.num_generators() <= target {
            return Ok(self.clone());
        }
        Ok(Zonotope {
            center: self.center.clone(),
            generators: frame_reduce(&self.generators, target),
        })
    }
}

pub(crate) fn budget(max_order: f64, n: usize) -> Result<usize> {
    let target = (max_order * n as f64 + 1e-9).floor();
    if !(target >= n as f64) {
        return Err(Error::InvalidArgument(format!(
            "order {max_order} leaves fewer than {n} generators"
        )));
    }
    Ok(target as usize)
}

/// Girard reduction carried out in the coordinates of a frame of `rows`
/// dominant generators: the generators are mapped by the frame inverse,
/// reduced by [`girard_reduce`] and mapped back. The frame columns become
/// unit vectors there, so they are never boxed. Falls back to the axis
/// frame when the chosen frame is too badly conditioned to invert.
pub(crate) fn frame_reduce(gens: &Matrix, target: usize) -> Matrix {
    if gens.cols() <= target {
        return gens.clone();
    }
    let frame = dominant_frame(gens);
    match frame.inverse() {
        Ok(inv) => {
            let local = inv.checked_mul(gens).expect("frame is square");
            frame.checked_mul(&girard_reduce(&local, target)).expect("frame is square")
        }
        Err(_) => girard_reduce(gens, target),
    }
}

/// Generators taken greedily by decreasing length, keeping one only when
/// at least a tenth of it lies outside the span of those already kept.
/// Unit axes fill any remaining slots.
fn dominant_frame(gens: &Matrix) -> Matrix {
    let n = gens.rows();
    let cols = columns(gens);
    let norm2 = |v: &[f64]| dot(v, v).sqrt();
    let mut idx: Vec<usize> = (0..cols.len()).filter(|&j| norm2(&cols[j]) > 0.0).collect();
    idx.sort_by(|&a, &b| norm2(&cols[b]).total_cmp(&norm2(&cols[a])).then(a.cmp(&b)));

    let mut frame: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n);
    let take = |v: &[f64], frame: &mut Vec<Vec<f64>>, basis: &mut Vec<Vec<f64>>, min_ratio: f64| {
        let mut r = v.to_vec();
        for q in basis.iter() {
            let p = dot(&r, q);
            r.iter_mut().zip(q).for_each(|(ri, qi)| *ri -= p * qi);
        }
        let nr = norm2(&r);
        if nr > min_ratio * norm2(v) {
            basis.push(r.iter().map(|x| x / nr).collect());
            frame.push(v.to_vec());
        }
    };
    for &j in &idx {
        if frame.len() == n {
            break;
        }
        take(&cols[j], &mut frame, &mut basis, 0.1);
    }
    for i in 0..n {
        if frame.len() == n {
            break;
        }
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        take(&e, &mut frame, &mut basis, 0.5);
    }
    Matrix::from_columns(n, &frame).expect("frame columns have length n")
}

/// Replaces the smallest generators (by `||g||_1 - ||g||_inf`) with their
/// axis-aligned box so that exactly `target` columns remain. Requires
/// `target >= rows`.
pub(crate) fn girard_reduce(gens: &Matrix, target: usize) -> Matrix {
    let rows = gens.rows();
    let m = gens.cols();
    debug_assert!(target >= rows);
    if m <= target {
        return gens.clone();
    }
    let cols = columns(gens);
    let score: Vec<f64> = cols.iter().map(|c| norm1(c) - norm_inf(c)).collect();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| score[a].total_cmp(&score[b]));
    let k = m - target + rows;
    let mut boxed = vec![0.0; rows];
    for &j in &order[..k] {
        for i in 0..rows {
            boxed[i] += cols[j][i].abs();
        }
    }
    let mut keep: Vec<usize> = order[k..].to_vec();
    keep.sort_unstable();
    let mut out: Vec<Vec<f64>> = keep.iter().map(|&j| cols[j].clone()).collect();
    for (i, b) in boxed.iter().enumerate() {
        let mut e = vec![0.0; rows];
        e[i] = *b;
        out.push(e);
    }
    Matrix::from_columns(rows, &out).expect("columns have matching length")
}

fn columns(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.cols()).map(|j| m.column(j)).collect()
}

fn scaled_vec(v: &[f64], s: f64) -> Vec<f64> {
    v.iter().map(|x| x * s).collect()
}

/// `det` of the columns `cols[s]`, with `extra` appended last when given.
fn subset_det(cols: &[Vec<f64>], s: &[usize], extra: Option<&[f64]>, buf: &mut [f64]) -> f64 {
    let k = s.len() + usize::from(extra.is_some());
    let n = cols.first().map_or_else(|| extra.map_or(0, <[f64]>::len), Vec::len);
    debug_assert_eq!(k, n);
    for i in 0..n {
        for (jj, &j) in s.iter().enumerate() {
            buf[i * n + jj] = cols[j][i];
        }
        if let Some(e) = extra {
            buf[i * n + n - 1] = e[i];
        }
    }
    det_in_place(&mut buf[..n * n], n)
}

fn det_in_place(a: &mut [f64], n: usize) -> f64 {
    let mut det = 1.0;
    for c in 0..n {
        let mut p = c;
        for r in c + 1..n {
            if a[r * n + c].abs() > a[p * n + c].abs() {
                p = r;
            }
        }
        let piv = a[p * n + c];
        if piv == 0.0 {
            return 0.0;
        }
        if p != c {
            for j in 0..n {
                a.swap(p * n + j, c * n + j);
            }
            det = -det;
        }
        det *= piv;
        for r in c + 1..n {
            let f = a[r * n + c] / piv;
            if f != 0.0 {
                for j in c..n {
                    a[r * n + j] -= f * a[c * n + j];
                }
            }
        }
    }
    det
}

/// `Vol(Z(l)) / 2^n = |1 - p'l| * base + sum_{|S'| = n-1} |det[T_S', l]|`.
fn family_volume(cols: &[Vec<f64>], base: f64, p: &[f64], lambda: &[f64], buf: &mut [f64]) -> f64 {
    let n = lambda.len();
    let mut total = (1.0 - dot(p, lambda)).abs() * base;
    for_each_combination(cols.len(), n - 1, |s| {
        total += subset_det(cols, s, Some(lambda), buf).abs();
    });
    total
}

pub fn zon_intersect_strip(z: &Zonotope, s: &Strip, criterion: Criterion) -> Result<Zonotope> {
    z.intersect_strip(s, criterion)
}
