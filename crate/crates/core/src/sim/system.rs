use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{dim_err, Error, Result};
use crate::numerics::{dot, mat_exp, Matrix};

/// `x(k+1) = A x + G w`, `z_i = C_i x`, `y_i = quantize(z_i + v_i)` with
/// `||w||_inf <= delta_w` and `|v_i| <= delta_v`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearSystem {
    pub a: Matrix,
    pub g: Matrix,
    pub c: Matrix,
    pub delta_w: f64,
    pub delta_v: f64,
}

impl LinearSystem {
    pub fn new(a: Matrix, g: Matrix, c: Matrix, delta_w: f64, delta_v: f64) -> Result<Self> {
        let n = a.rows();
        if !a.is_square() || n == 0 {
            return dim_err("A must be square and nonempty");
        }
        if g.rows() != n || c.cols() != n || c.rows() == 0 {
            return dim_err(format!(
                "G is {}x{} and C is {}x{} for n = {n}",
                g.rows(),
                g.cols(),
                c.rows(),
                c.cols()
            ));
        }
        if !(delta_w >= 0.0) || !(delta_v >= 0.0) {
            return Err(Error::InvalidArgument("disturbance bounds must be nonnegative".into()));
        }
        Ok(Self {
            a,
            g,
            c,
            delta_w,
            delta_v,
        })
    }

    /// Zero-order-hold discretization of `x' = A_c x + G_c w` with sampling
    /// time `ts`.
    pub fn from_continuous(ac: &Matrix, gc: &Matrix, c: Matrix, ts: f64, delta_w: f64, delta_v: f64) -> Result<Self> {
        let n = ac.rows();
        let m = gc.cols();
        if !ac.is_square() || gc.rows() != n {
            return dim_err("continuous-time matrices have inconsistent sizes");
        }
        let top = ac.hcat(gc)?;
        let aug = top.vcat(&Matrix::zeros(m, n + m))?;
        let e = mat_exp(&aug, ts)?;
        let a = e.select_columns(&(0..n).collect::<Vec<_>>());
        let g = e.select_columns(&(n..n + m).collect::<Vec<_>>());
        let keep = |mat: Matrix| Matrix::from_rows(&mat.to_rows()[..n]);
        Self::new(keep(a)?, keep(g)?, c, delta_w, delta_v)
    }

    pub fn n(&self) -> usize {
        self.a.rows()
    }

    pub fn inputs(&self) -> usize {
        self.g.cols()
    }

    pub fn outputs(&self) -> usize {
        self.c.rows()
    }

    pub fn c_row(&self, i: usize) -> &[f64] {
        self.c.row(i)
    }

    pub fn step(&self, x: &[f64], w: &[f64]) -> Vec<f64> {
        let ax = self.a.mul_vec(x);
        let gw = self.g.mul_vec(w);
        ax.iter().zip(&gw).map(|(a, b)| a + b).collect()
    }

    pub fn output(&self, i: usize, x: &[f64]) -> f64 {
        dot(self.c_row(i), x)
    }

    /// `[c; cA; ...; cA^{n-1}]`.
    pub fn observability_matrix(&self, c: &[f64]) -> Matrix {
        let n = self.n();
        let mut rows = Vec::with_capacity(n);
        let mut r = c.to_vec();
        for _ in 0..n {
            rows.push(r.clone());
            r = self.a.vec_mul(&r);
        }
        Matrix::from_rows(&rows).expect("rows of length n")
    }

    pub fn is_observable_from(&self, c: &[f64]) -> bool {
        self.observability_matrix(c).rank(1e-9) == self.n()
    }

    /// The two-mass, three-spring oscillator sampled at 0.1 s, measuring the
    /// second mass position.
    pub fn double_oscillator() -> Self {
        let ac = Matrix::from_rows(&[
            vec![0.0, 1.0, 0.0, 0.0],
            vec![-20.0, 0.0, 10.0, 0.0],
            vec![0.0, 0.0, 0.0, 1.0],
            vec![10.0, 0.0, -10.0, 0.0],
        ])
        .expect("constant matrix");
        let gc = Matrix::from_rows(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 0.0], vec![0.0, 1.0]])
            .expect("constant matrix");
        let c = Matrix::row_vector(&[0.0, 0.0, 1.0, 0.0]);
        Self::from_continuous(&ac, &gc, c, 0.1, 0.2, 0.05).expect("valid constant system")
    }

    /// Random asymptotically stable system `A = M D M'` with `M` orthogonal
    /// and `D` made of real eigenvalues and rotation blocks of magnitude in
    /// `[0.3, 0.95]`; `G`, `C` uniform in `[-1, 1]`; every output row
    /// observable.
    pub fn random_stable(n: usize, m: usize, p: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        loop {
            let sys = random_candidate(&mut rng, n, m, p);
            if (0..p).all(|i| sys.is_observable_from(sys.c_row(i))) {
                return sys;
            }
        }
    }
}

fn random_candidate(rng: &mut ChaCha8Rng, n: usize, m: usize, p: usize) -> LinearSystem {
    let mut uniform = |r: usize, c: usize| {
        Matrix::from_vec(r, c, (0..r * c).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .expect("sizes match")
    };
    let basis = orthonormalize(&uniform(n, n));
    let g = uniform(n, m);
    let c = uniform(p, n);
    let mut d = Matrix::zeros(n, n);
    let mut i = 0;
    while i < n {
        let r = rng.gen_range(0.3..0.95);
        if i + 1 < n && rng.gen_bool(0.5) {
            let theta: f64 = rng.gen_range(0.0..std::f64::consts::PI);
            d[(i, i)] = r * theta.cos();
            d[(i, i + 1)] = -r * theta.sin();
            d[(i + 1, i)] = r * theta.sin();
            d[(i + 1, i + 1)] = r * theta.cos();
            i += 2;
        } else {
            d[(i, i)] = if rng.gen_bool(0.5) { r } else { -r };
            i += 1;
        }
    }
    let a = &(&basis * &d) * &basis.transpose();
    LinearSystem::new(a, g, c, 0.1, 0.1).expect("consistent sizes")
}

/// Gram-Schmidt on the columns (redone twice for stability).
fn orthonormalize(m: &Matrix) -> Matrix {
    let n = m.rows();
    let mut cols: Vec<Vec<f64>> = Vec::new();
    for j in 0..m.cols() {
        let mut v = m.column(j);
        for _ in 0..2 {
            for q in &cols {
                let proj = dot(q, &v);
                v.iter_mut().zip(q).for_each(|(a, b)| *a -= proj * b);
            }
        }
        let norm = dot(&v, &v).sqrt();
        cols.push(v.iter().map(|x| x / norm).collect());
    }
    Matrix::from_columns(n, &cols).expect("columns of length n")
}
