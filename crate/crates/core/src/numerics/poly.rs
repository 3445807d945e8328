use crate::error::{Error, Result};

/// Relative margin of the Jury tabulation. Roots this close to the unit
/// circle count as on it.
const JURY_MARGIN: f64 = 1e-12;

/// Real polynomial with coefficients ordered from the highest degree down.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        match coeffs.first() {
            None => Err(Error::InvalidPolynomial("no coefficients".into())),
            Some(&c) if c == 0.0 => Err(Error::InvalidPolynomial(
                "leading coefficient is zero".into(),
            )),
            Some(_) if coeffs.iter().any(|c| !c.is_finite()) => Err(
                Error::InvalidPolynomial("non-finite coefficient".into()),
            ),
            Some(_) => Ok(Self { coeffs }),
        }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn is_monic(&self) -> bool {
        self.coeffs[0] == 1.0
    }

    pub fn eval(&self, z: f64) -> f64 {
        self.coeffs.iter().fold(0.0, |acc, c| acc * z + c)
    }

    /// True iff every root lies strictly inside the unit circle.
    ///
    /// Jury/Schur-Cohn reduction: with `c` the coefficients (leading first),
    /// the polynomial is Schur iff `|c_n| < |c_0|` and the degree-(n-1)
    /// polynomial `c_0 c_j - c_n c_{n-j}` is Schur.
    pub fn is_schur(&self) -> bool {
        let lead = self.coeffs[0];
        let mut c: Vec<f64> = self.coeffs.iter().map(|v| v / lead).collect();
        while c.len() > 1 {
            let n = c.len() - 1;
            let (first, last) = (c[0], c[n]);
            if !(last.abs() < first.abs() * (1.0 - JURY_MARGIN)) {
                return false;
            }
            let next: Vec<f64> = (0..n).map(|j| first * c[j] - last * c[n - j]).collect();
            let head = next[0];
            c = next.into_iter().map(|v| v / head).collect();
        }
        true
    }
}

pub fn is_schur(p: &Polynomial) -> bool {
    p.is_schur()
}
