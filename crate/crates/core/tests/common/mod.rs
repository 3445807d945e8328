//! Independent oracles shared by the property and acceptance suites.
#![allow(dead_code)]

use quantsm::geometry::{Interval, Strip, Zonotope};
use quantsm::numerics::{Direction, LinearProgram, Matrix};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn random_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Matrix {
    Matrix::from_vec(r, c, (0..r * c).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
}

/// Random matrix whose smallest singular direction is not too flat.
pub fn random_invertible(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    loop {
        let a = random_matrix(rng, n, n);
        if a.det().unwrap().abs() > 0.1 {
            return a;
        }
    }
}

/// Solves `m x = b` by Cramer's rule; `m` is at most 3x3.
pub fn cramer(m: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let det = |a: &[Vec<f64>]| -> f64 {
        match n {
            1 => a[0][0],
            2 => a[0][0] * a[1][1] - a[0][1] * a[1][0],
            3 => {
                a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
                    + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
            }
            _ => unreachable!("at most three unknowns"),
        }
    };
    let d = det(m);
    if d.abs() < 1e-12 {
        return None;
    }
    Some(
        (0..n)
            .map(|j| {
                let mut mj = m.to_vec();
                for i in 0..n {
                    mj[i][j] = b[i];
                }
                det(&mj) / d
            })
            .collect(),
    )
}

/// Pre-image of a point of `A S + gamma G B` following the sign
/// construction of the strip image proof: returns `(y, w)` with
/// `x = A y + gamma G w`.
pub fn strip_image_witness(s: &Strip, a: &Matrix, g: &Matrix, gamma: f64, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let ainv = a.inverse().unwrap();
    let pa = ainv.vec_mul(&s.normal);
    let pag = g.vec_mul(&pa);
    let l1: f64 = pag.iter().map(|v| v.abs()).sum();
    let r = dot(&pa, x) - s.center;
    let excess = (r.abs() - 1.0).max(0.0);
    let w: Vec<f64> = pag
        .iter()
        .map(|v| {
            if gamma * l1 == 0.0 {
                0.0
            } else {
                r.signum() * v.signum() * excess / (gamma * l1)
            }
        })
        .collect();
    let gw = g.mul_vec(&w);
    let shifted: Vec<f64> = x.iter().zip(&gw).map(|(xi, gi)| xi - gamma * gi).collect();
    (ainv.mul_vec(&shifted), w)
}

/// Facet description of a full-dimensional 3-d zonotope: every pair of
/// non-parallel generators spans a facet normal.
pub fn zonotope_facets(z: &Zonotope) -> Vec<(Vec<f64>, f64)> {
    let g: Vec<Vec<f64>> = (0..z.generators.cols()).map(|j| z.generators.column(j)).collect();
    let mut out = Vec::new();
    for i in 0..g.len() {
        for j in i + 1..g.len() {
            let n = vec![
                g[i][1] * g[j][2] - g[i][2] * g[j][1],
                g[i][2] * g[j][0] - g[i][0] * g[j][2],
                g[i][0] * g[j][1] - g[i][1] * g[j][0],
            ];
            if dot(&n, &n).sqrt() < 1e-12 {
                continue;
            }
            let h: f64 = g.iter().map(|gk| dot(&n, gk).abs()).sum();
            out.push((n, h));
        }
    }
    out
}

pub fn in_facets(facets: &[(Vec<f64>, f64)], center: &[f64], x: &[f64]) -> bool {
    let d: Vec<f64> = x.iter().zip(center).map(|(a, b)| a - b).collect();
    facets.iter().all(|(n, h)| dot(n, &d).abs() <= *h)
}

/// Optimum of a program with at most three variables by enumerating the
/// basic solutions: each variable sits at a bound or is free, with as many
/// free variables as equality rows. `None` when no vertex is feasible.
pub fn lp_by_vertices(lp: &LinearProgram, direction: Direction) -> Option<f64> {
    let n = lp.objective.len();
    let k = lp.eq_rhs.len();
    let mut best: Option<f64> = None;
    for code in 0..3usize.pow(n as u32) {
        let state: Vec<usize> = (0..n).map(|i| code / 3usize.pow(i as u32) % 3).collect();
        let free: Vec<usize> = (0..n).filter(|&i| state[i] == 2).collect();
        if free.len() != k {
            continue;
        }
        let mut x: Vec<f64> = (0..n)
            .map(|i| match state[i] {
                0 => lp.lower[i],
                1 => lp.upper[i],
                _ => 0.0,
            })
            .collect();
        if k > 0 {
            let m: Vec<Vec<f64>> = (0..k).map(|r| free.iter().map(|&j| lp.eq_matrix[(r, j)]).collect()).collect();
            let b: Vec<f64> = (0..k)
                .map(|r| lp.eq_rhs[r] - dot(lp.eq_matrix.row(r), &x))
                .collect();
            let Some(sol) = cramer(&m, &b) else { continue };
            for (&j, v) in free.iter().zip(sol) {
                x[j] = v;
            }
        }
        if (0..n).any(|i| x[i] < lp.lower[i] - 1e-9 || x[i] > lp.upper[i] + 1e-9) {
            continue;
        }
        let v = dot(&lp.objective, &x);
        best = Some(match (best, direction) {
            (None, _) => v,
            (Some(b), Direction::Maximize) => b.max(v),
            (Some(b), Direction::Minimize) => b.min(v),
        });
    }
    best
}

/// Monic polynomial coefficients, leading first, from real roots and
/// complex pairs `(re, im)`.
pub fn poly_from_roots(real: &[f64], pairs: &[(f64, f64)]) -> Vec<f64> {
    let mut c = vec![1.0];
    let mut mul = |f: &[f64]| {
        let mut out = vec![0.0; c.len() + f.len() - 1];
        for (i, a) in c.iter().enumerate() {
            for (j, b) in f.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        c = out;
    };
    for &r in real {
        mul(&[1.0, -r]);
    }
    for &(re, im) in pairs {
        mul(&[1.0, -2.0 * re, re * re + im * im]);
    }
    c
}

/// Length of `(lo, hi]`-style output cell clamped to `range`.
pub fn clamped_length(cell: (Option<f64>, Option<f64>), range: Interval) -> f64 {
    let lo = cell.0.map_or(range.lo, |v| v.max(range.lo));
    let hi = cell.1.map_or(range.hi, |v| v.min(range.hi));
    hi - lo
}
