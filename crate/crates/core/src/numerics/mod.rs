//! Dense linear algebra, polynomial stability, matrix exponential and a small
//! box-bounded LP solver.

mod expm;
mod lp;
mod matrix;
mod poly;

pub use expm::mat_exp;
pub use lp::{solve_lp, Direction, LinearProgram, LpSolution};
pub use matrix::{lu_det, Lu, Matrix};
pub use poly::{is_schur, Polynomial};

/// Pivots (relative to the operand scale) below this are treated as zero.
pub const PIVOT_EPS: f64 = 1e-12;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm1(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

pub fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scaled(v: &[f64], s: f64) -> Vec<f64> {
    v.iter().map(|x| x * s).collect()
}

/// Calls `f` on every subset of `0..m` of size `k`, in lexicographic order.
pub fn for_each_combination(m: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > m {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + m - k {
                break;
            }
            if i == 0 {
                return;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Iterates the 2^n sign vectors of the unit box vertices.
pub fn box_vertices(n: usize) -> impl Iterator<Item = Vec<f64>> {
    assert!(n < 31, "vertex enumeration beyond 2^30 vertices");
    (0u32..(1u32 << n)).map(move |mask| {
        (0..n)
            .map(|i| if mask & (1 << i) != 0 { 1.0 } else { -1.0 })
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combinations_enumerate_binomial_count() {
        let mut seen = Vec::new();
        for_each_combination(5, 3, |c| seen.push(c.to_vec()));
        assert_eq!(seen.len(), 10);
        assert_eq!(seen.first().unwrap(), &vec![0, 1, 2]);
        assert_eq!(seen.last().unwrap(), &vec![2, 3, 4]);
        let mut count = 0;
        for_each_combination(4, 0, |c| {
            assert!(c.is_empty());
            count += 1
        });
        assert_eq!(count, 1);
        for_each_combination(2, 3, |_| panic!("k > m"));
    }

    #[test]
    fn box_vertices_cover_signs() {
        let v: Vec<_> = box_vertices(2).collect();
        assert_eq!(v.len(), 4);
        assert!(v.contains(&vec![1.0, -1.0]));
    }
}
