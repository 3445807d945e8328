use crate::error::{dim_err, Result};
use crate::numerics::Matrix;

const TAYLOR_TERMS: usize = 13;
const SQUARING_THRESHOLD: f64 = 0.5;

/// `exp(M t)` by scaling and squaring with a truncated Taylor series.
pub fn mat_exp(m: &Matrix, t: f64) -> Result<Matrix> {
    if !m.is_square() {
        return dim_err(format!("exponential of a {}x{} matrix", m.rows(), m.cols()));
    }
    let x = m.scale(t);
    let norm = x.norm1();
    let squarings = if norm > SQUARING_THRESHOLD {
        (norm / SQUARING_THRESHOLD).log2().ceil() as i32
    } else {
        0
    };
    let x = x.scale(0.5f64.powi(squarings));

    let n = m.rows();
    let mut result = Matrix::identity(n);
    let mut term = Matrix::identity(n);
    for k in 1..=TAYLOR_TERMS {
        term = (&term * &x).scale(1.0 / k as f64);
        result = &result + &term;
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    Ok(result)
}
