//! Uniform quantizers, the state sets compatible with a reading, and the
//! threshold adaptation laws.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{HalfSpace, Interval, Sense, Strip, Zonotope};
use crate::numerics::dot;

/// `d` uniformly spaced thresholds around `center` with spacing `resolution`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quantizer {
    pub d: usize,
    pub center: f64,
    pub resolution: f64,
}

impl Quantizer {
    pub fn new(d: usize, center: f64, resolution: f64) -> Result<Self> {
        if d < 1 {
            return Err(Error::InvalidArgument("a quantizer needs d >= 1".into()));
        }
        if !(resolution > 0.0) || !resolution.is_finite() || !center.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "invalid quantizer center {center} / resolution {resolution}"
            )));
        }
        Ok(Self {
            d,
            center,
            resolution,
        })
    }

    /// Thresholds equally spaced on `[lo, hi]`, both ends included.
    pub fn spanning(lo: f64, hi: f64, d: usize) -> Result<Self> {
        if !(hi > lo) {
            return Err(Error::InvalidArgument(format!("empty threshold span [{lo}, {hi}]")));
        }
        let resolution = if d > 1 { (hi - lo) / (d - 1) as f64 } else { hi - lo };
        Self::new(d, 0.5 * (lo + hi), resolution)
    }

    pub fn threshold(&self, i: usize) -> f64 {
        self.center - ((self.d as f64 + 1.0) / 2.0 - i as f64) * self.resolution
    }

    /// `tau_1 < ... < tau_d`.
    pub fn thresholds(&self) -> Vec<f64> {
        (1..=self.d).map(|i| self.threshold(i)).collect()
    }

    /// Number of thresholds strictly below `z`.
    pub fn quantize(&self, z: f64) -> usize {
        (1..=self.d).filter(|&i| self.threshold(i) < z).count()
    }

    /// Values of `Cx` compatible with reading `y` under noise `|v| <= delta_v`;
    /// `None` marks an open end.
    pub fn output_cell(&self, y: usize, delta_v: f64) -> (Option<f64>, Option<f64>) {
        let lo = (y > 0).then(|| self.threshold(y) - delta_v);
        let hi = (y < self.d).then(|| self.threshold(y + 1) + delta_v);
        (lo, hi)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum MeasurementKind {
    Strip(Strip),
    HalfSpace(HalfSpace),
}

/// States compatible with one quantized reading.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementSet {
    pub y: usize,
    pub kind: MeasurementKind,
}

impl MeasurementSet {
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        match &self.kind {
            MeasurementKind::Strip(s) => s.contains(x, tol),
            MeasurementKind::HalfSpace(h) => h.contains(x, tol),
        }
    }

    pub fn as_strip(&self) -> Option<&Strip> {
        match &self.kind {
            MeasurementKind::Strip(s) => Some(s),
            MeasurementKind::HalfSpace(_) => None,
        }
    }
}

/// `M(k)` for reading `y` on output row `c`. With a clamp interval (the
/// current range of `Cx`) every cell is closed against it and the result
/// is always a strip; without one the outer cells stay half-spaces.
pub fn measurement_set(
    y: usize,
    q: &Quantizer,
    delta_v: f64,
    c: &[f64],
    clamp: Option<Interval>,
) -> Result<MeasurementSet> {
    if y > q.d {
        return Err(Error::InvalidArgument(format!("reading {y} exceeds d = {}", q.d)));
    }
    let (lo, hi) = q.output_cell(y, delta_v);
    let kind = match (clamp, lo, hi) {
        (Some(range), _, _) => {
            let cell = Interval::new(
                lo.map_or(range.lo, |v| v.max(range.lo)),
                hi.map_or(range.hi, |v| v.min(range.hi)),
            )?;
            let floor = 1e-12 * (1.0 + cell.center().abs());
            let cell = if cell.radius() < floor {
                Interval::centered(cell.center(), floor)
            } else {
                cell
            };
            MeasurementKind::Strip(Strip::from_bounds(c, cell)?)
        }
        (None, Some(lo), Some(hi)) => MeasurementKind::Strip(Strip::from_bounds(c, Interval::new(lo, hi)?)?),
        (None, None, Some(hi)) => MeasurementKind::HalfSpace(HalfSpace::new(c.to_vec(), hi, Sense::AtMost)?),
        (None, Some(lo), None) => MeasurementKind::HalfSpace(HalfSpace::new(c.to_vec(), lo, Sense::Above)?),
        (None, None, None) => unreachable!("d >= 1 gives at least one finite end"),
    };
    Ok(MeasurementSet { y, kind })
}

/// Resolution used when any positive resolution is optimal.
pub fn resolution_floor(width: f64) -> f64 {
    1e-6 * width.max(1.0)
}

/// Optimal quantizer for `x(k+1) = a x(k) + w(k)` given the previous
/// feasible interval.
pub fn adapt_first_order(a: f64, prev: Interval, delta_w: f64, delta_v: f64, d: usize) -> Result<Quantizer> {
    let rho = prev.radius();
    let center = a * prev.center();
    let slack = a.abs() * rho + delta_w - delta_v;
    let resolution = if slack > 0.0 {
        2.0 * slack / (d as f64 + 1.0)
    } else {
        resolution_floor(2.0 * (a.abs() * rho + delta_w))
    };
    Quantizer::new(d, center, resolution)
}

/// Quantizer giving equal-length cells over the output range `[lo, hi]`.
pub fn adapt_from_support(lo: f64, hi: f64, delta_v: f64, d: usize) -> Result<Quantizer> {
    if hi < lo {
        return Err(Error::EmptySet(format!("output range [{lo}, {hi}]")));
    }
    let width = hi - lo;
    let resolution = if width > 2.0 * delta_v {
        (width - 2.0 * delta_v) / (d as f64 + 1.0)
    } else {
        resolution_floor(width)
    };
    Quantizer::new(d, 0.5 * (lo + hi), resolution)
}

/// [`adapt_from_support`] on the closed-form output range of a zonotope.
pub fn adapt_from_zonotope(z: &Zonotope, c: &[f64], delta_v: f64, d: usize) -> Result<Quantizer> {
    let r = z.width_along(c)?;
    let center = dot(c, &z.center);
    let spread = 0.5 * r.width();
    let resolution = if spread > delta_v {
        2.0 * (spread - delta_v) / (d as f64 + 1.0)
    } else {
        resolution_floor(r.width())
    };
    Quantizer::new(d, center, resolution)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Matrix;

    fn example() -> Quantizer {
        Quantizer::new(5, 0.0, 3.0).unwrap()
    }

    #[test]
    fn thresholds_odd_even_single() {
        assert_eq!(example().thresholds(), vec![-6.0, -3.0, 0.0, 3.0, 6.0]);
        assert_eq!(Quantizer::new(1, 0.7, 2.0).unwrap().thresholds(), vec![0.7]);
        assert_eq!(
            Quantizer::new(4, 0.0, 1.0).unwrap().thresholds(),
            vec![-1.5, -0.5, 0.5, 1.5]
        );
    }

    #[test]
    fn quantize_cells() {
        let q = example();
        assert_eq!(q.quantize(-7.0), 0);
        assert_eq!(q.quantize(-6.0), 0);
        assert_eq!(q.quantize(0.0), 2);
        assert_eq!(q.quantize(7.0), 5);
    }

    #[test]
    fn measurement_set_interior_and_outer_cells() {
        let q = example();
        let clamp = Some(Interval::new(-11.0, 11.0).unwrap());
        let m = measurement_set(2, &q, 2.0, &[1.0], clamp).unwrap();
        let s = m.as_strip().unwrap();
        assert!((s.center / s.normal[0] + 1.5).abs() < 1e-12);
        assert!((1.0 / s.normal[0] - 3.5).abs() < 1e-12);
        for y in 0..=5 {
            let m = measurement_set(y, &q, 2.0, &[1.0], clamp).unwrap();
            let s = m.as_strip().unwrap();
            assert!((1.0 / s.normal[0] - 3.5).abs() < 1e-12, "y = {y}");
        }
        let h = measurement_set(0, &q, 0.0, &[1.0], None).unwrap();
        assert_eq!(
            h.kind,
            MeasurementKind::HalfSpace(HalfSpace::new(vec![1.0], -6.0, Sense::AtMost).unwrap())
        );
        let bad = Some(Interval { lo: 20.0, hi: 30.0 });
        assert!(matches!(
            measurement_set(0, &q, 0.0, &[1.0], bad),
            Err(Error::EmptySet(_))
        ));
    }

    #[test]
    fn first_order_law() {
        let q = adapt_first_order(2.0, Interval::new(-5.0, 5.0).unwrap(), 1.0, 2.0, 5).unwrap();
        assert_eq!((q.center, q.resolution), (0.0, 3.0));
        let q = adapt_first_order(1.0, Interval::new(0.0, 2.0).unwrap(), 0.0, 0.0, 1).unwrap();
        assert_eq!((q.center, q.resolution), (1.0, 1.0));
        let q = adapt_first_order(0.5, Interval::new(-1.0, 1.0).unwrap(), 0.1, 1.0, 3).unwrap();
        assert_eq!(q.center, 0.0);
        assert_eq!(q.resolution, resolution_floor(1.2));
    }

    #[test]
    fn support_law() {
        let q = adapt_from_support(-11.0, 11.0, 2.0, 5).unwrap();
        assert_eq!((q.center, q.resolution), (0.0, 3.0));
        let q = adapt_from_support(0.0, 1.0, 0.0, 1).unwrap();
        assert_eq!((q.center, q.resolution), (0.5, 0.5));
        let q = adapt_from_support(0.0, 0.1, 0.2, 3).unwrap();
        assert_eq!(q.resolution, resolution_floor(0.1));
        assert!(adapt_from_support(1.0, 0.0, 0.0, 3).is_err());
    }

    #[test]
    fn zonotope_law() {
        let z = Zonotope::from_box(vec![0.0], &[11.0]).unwrap();
        let q = adapt_from_zonotope(&z, &[1.0], 2.0, 5).unwrap();
        assert_eq!((q.center, q.resolution), (0.0, 3.0));
        let z = Zonotope::new(vec![0.0, 0.0], Matrix::from_rows(&[vec![1.0], vec![0.0]]).unwrap()).unwrap();
        let q = adapt_from_zonotope(&z, &[0.0, 1.0], 0.1, 3).unwrap();
        assert_eq!(q.resolution, resolution_floor(0.0));
    }

    #[test]
    fn invalid_quantizers() {
        assert!(Quantizer::new(0, 0.0, 1.0).is_err());
        assert!(Quantizer::new(3, 0.0, 0.0).is_err());
        assert!(measurement_set(6, &example(), 0.0, &[1.0], None).is_err());
    }

    #[test]
    fn spanning_includes_endpoints() {
        let q = Quantizer::spanning(-5.0, 5.0, 5).unwrap();
        assert_eq!(q.thresholds(), vec![-5.0, -2.5, 0.0, 2.5, 5.0]);
    }
}
