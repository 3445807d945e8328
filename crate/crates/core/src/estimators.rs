//! Recursive set-membership estimators: correction by the measurement set
//! of each quantized reading, prediction through the dynamics, and order
//! reduction after both.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{dim_err, Error, Result};
use crate::geometry::{
    strip_propagate, ConstrainedZonotope, Criterion, Interval, Parallelotope, Region, Strip,
    Zonotope,
};
use crate::numerics::{Matrix, PIVOT_EPS};
use crate::quantizer::{adapt_from_support, adapt_from_zonotope, measurement_set, Quantizer};

/// Serialized as its display string, e.g. `zon(2)` or `cz(2,10)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum EstimatorKind {
    /// Exact feasible interval, `n = 1` only.
    Interval,
    Parallelotope,
    Zonotope { max_order: f64, criterion: Criterion },
    Constrained { max_order: f64, max_constraints: usize },
    /// Parallelotope spanned by the `n` most recent measurement strips, each
    /// propagated to the current time.
    LastNStrips,
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EstimatorKind::Interval => write!(f, "interval"),
            EstimatorKind::Parallelotope => write!(f, "par"),
            EstimatorKind::Zonotope {
                max_order,
                criterion: Criterion::Volume,
            } => write!(f, "zon({max_order})"),
            EstimatorKind::Zonotope {
                max_order,
                criterion: Criterion::Frobenius,
            } => write!(f, "zon({max_order},frobenius)"),
            EstimatorKind::Constrained {
                max_order,
                max_constraints,
            } => write!(f, "cz({max_order},{max_constraints})"),
            EstimatorKind::LastNStrips => write!(f, "last-n-strips"),
        }
    }
}

impl FromStr for EstimatorKind {
    type Err = Error;

    /// Accepts `interval`, `par`, `zon(o)`, `zon(o,frobenius)`, `cz(o,nc)`
    /// and `last-n-strips`, case-insensitively.
    fn from_str(s: &str) -> Result<Self> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_lowercase();
        let bad = || Error::InvalidArgument(format!("unknown estimator `{s}`"));
        let args = |prefix: &str| -> Option<Vec<String>> {
            t.strip_prefix(prefix)?
                .strip_prefix('(')?
                .strip_suffix(')')
                .map(|inner| inner.split(',').map(str::to_string).collect())
        };
        let order = |v: &str| -> Result<f64> {
            let o: f64 = v.parse().map_err(|_| bad())?;
            if o >= 1.0 {
                Ok(o)
            } else {
                Err(Error::InvalidArgument(format!("order must be >= 1 in `{s}`")))
            }
        };
        match t.as_str() {
            "interval" => return Ok(EstimatorKind::Interval),
            "par" | "parallelotope" => return Ok(EstimatorKind::Parallelotope),
            "last-n-strips" => return Ok(EstimatorKind::LastNStrips),
            _ => {}
        }
        if let Some(a) = args("zon") {
            let criterion = match a.get(1).map(String::as_str) {
                None | Some("volume") => Criterion::Volume,
                Some("frobenius") => Criterion::Frobenius,
                Some(_) => return Err(bad()),
            };
            if a.len() > 2 {
                return Err(bad());
            }
            return Ok(EstimatorKind::Zonotope {
                max_order: order(&a[0])?,
                criterion,
            });
        }
        if let Some(a) = args("cz") {
            if a.len() != 2 {
                return Err(bad());
            }
            return Ok(EstimatorKind::Constrained {
                max_order: order(&a[0])?,
                max_constraints: a[1].parse().map_err(|_| bad())?,
            });
        }
        Err(bad())
    }
}

impl TryFrom<String> for EstimatorKind {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<EstimatorKind> for String {
    fn from(k: EstimatorKind) -> String {
        k.to_string()
    }
}

/// Threshold policy: adapted from the current set, or constant per output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Adaptation {
    Adaptive,
    Fixed(Vec<Quantizer>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub kind: EstimatorKind,
    pub adaptation: Adaptation,
}

impl EstimatorConfig {
    pub fn adaptive(kind: EstimatorKind) -> Self {
        Self {
            kind,
            adaptation: Adaptation::Adaptive,
        }
    }

    pub fn fixed(kind: EstimatorKind, quantizers: Vec<Quantizer>) -> Self {
        Self {
            kind,
            adaptation: Adaptation::Fixed(quantizers),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Predicted,
    Corrected,
}

/// Per-coordinate bounds of the current set.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StateBounds {
    pub hull: Vec<Interval>,
    pub half_widths: Vec<f64>,
    /// Exact Euclidean radius for parallelotope-based estimators.
    pub par_radius: Option<f64>,
}

impl StateBounds {
    pub fn mean_half_width(&self) -> f64 {
        self.half_widths.iter().sum::<f64>() / self.half_widths.len() as f64
    }
}

#[derive(Clone, Debug)]
pub struct EstimatorState {
    pub config: EstimatorConfig,
    pub region: Region,
    pub k: usize,
    pub stage: Stage,
    pub last_quantizers: Vec<Option<Quantizer>>,
    pub last_ranges: Vec<Option<Interval>>,
    /// Corrections whose intersection came out numerically empty.
    pub empty_recoveries: usize,
    strips: VecDeque<Strip>,
    predicted_image: Option<Zonotope>,
    range_cache: Option<(Vec<f64>, Interval)>,
}

impl EstimatorState {
    /// Starts from `Pi(0|-1)`, which must use the representation of the
    /// configured kind.
    pub fn init(config: EstimatorConfig, initial: Region, outputs: usize) -> Result<Self> {
        let ok = matches!(
            (&config.kind, &initial),
            (EstimatorKind::Interval, Region::Interval(_))
                | (EstimatorKind::Parallelotope, Region::Parallelotope(_))
                | (EstimatorKind::LastNStrips, Region::Parallelotope(_))
                | (EstimatorKind::Zonotope { .. }, Region::Zonotope(_))
                | (EstimatorKind::Constrained { .. }, Region::Constrained(_))
        );
        if !ok {
            return Err(Error::InvalidArgument(format!(
                "initial region does not match estimator `{}`",
                config.kind
            )));
        }
        if let Adaptation::Fixed(q) = &config.adaptation {
            if q.len() != outputs {
                return dim_err(format!("{} fixed quantizers for {outputs} outputs", q.len()));
            }
        }
        let strips = match &initial {
            Region::Parallelotope(p) if config.kind == EstimatorKind::LastNStrips => p.strips().into(),
            _ => VecDeque::new(),
        };
        Ok(Self {
            config,
            region: initial,
            k: 0,
            stage: Stage::Predicted,
            last_quantizers: vec![None; outputs],
            last_ranges: vec![None; outputs],
            empty_recoveries: 0,
            strips,
            predicted_image: None,
            range_cache: None,
        })
    }

    /// Initial state from the axis-aligned box `center ± radii`.
    pub fn from_box(config: EstimatorConfig, center: &[f64], radii: &[f64], outputs: usize) -> Result<Self> {
        if center.len() != radii.len() {
            return dim_err("box center and radii differ in length");
        }
        let region = match config.kind {
            EstimatorKind::Interval => {
                if center.len() != 1 {
                    return dim_err("the interval estimator needs n = 1");
                }
                Region::Interval(Interval::centered(center[0], radii[0]))
            }
            EstimatorKind::Parallelotope | EstimatorKind::LastNStrips => {
                Region::Parallelotope(Parallelotope::from_box(center.to_vec(), radii)?)
            }
            EstimatorKind::Zonotope { .. } => {
                Region::Zonotope(Zonotope::from_box(center.to_vec(), radii)?)
            }
            EstimatorKind::Constrained { .. } => Region::Constrained(
                ConstrainedZonotope::from_zonotope(&Zonotope::from_box(center.to_vec(), radii)?),
            ),
        };
        Self::init(config, region, outputs)
    }

    pub fn dim(&self) -> usize {
        self.region.dim()
    }

    /// Range of `c'x` over the current set; for `last-n-strips` in the
    /// prediction stage this is the exact image of the previous set.
    pub fn output_range(&mut self, c: &[f64]) -> Result<Interval> {
        if let Some((cc, r)) = &self.range_cache {
            if cc.as_slice() == c {
                return Ok(*r);
            }
        }
        let r = match (&self.predicted_image, self.stage) {
            (Some(z), Stage::Predicted) => z.width_along(c)?,
            _ => self.region.width_along(c)?,
        };
        self.range_cache = Some((c.to_vec(), r));
        Ok(r)
    }

    /// Quantizer for output `i` with row `c`.
    pub fn select_thresholds(&mut self, i: usize, c: &[f64], delta_v: f64, d: usize) -> Result<Quantizer> {
        let q = match &self.config.adaptation {
            Adaptation::Fixed(qs) => *qs
                .get(i)
                .ok_or_else(|| Error::InvalidArgument(format!("no fixed quantizer for output {i}")))?,
            Adaptation::Adaptive => match (&self.config.kind, &self.region) {
                (EstimatorKind::Parallelotope, Region::Parallelotope(p)) => {
                    adapt_from_zonotope(&p.to_zonotope(), c, delta_v, d)?
                }
                (EstimatorKind::Zonotope { .. }, Region::Zonotope(z)) => adapt_from_zonotope(z, c, delta_v, d)?,
                (EstimatorKind::LastNStrips, Region::Parallelotope(p)) => {
                    let z = match (&self.predicted_image, self.stage) {
                        (Some(z), Stage::Predicted) => z.clone(),
                        _ => p.to_zonotope(),
                    };
                    adapt_from_zonotope(&z, c, delta_v, d)?
                }
                _ => {
                    let r = self.output_range(c)?;
                    adapt_from_support(r.lo, r.hi, delta_v, d)?
                }
            },
        };
        if i < self.last_quantizers.len() {
            self.last_quantizers[i] = Some(q);
        }
        Ok(q)
    }

    /// Intersects with the measurement set of reading `y` on output `i`,
    /// then reduces. A numerically empty intersection keeps the current
    /// set and is counted in `empty_recoveries`.
    pub fn correct(&mut self, i: usize, y: usize, q: &Quantizer, c: &[f64], delta_v: f64) -> Result<()> {
        if c.len() != self.dim() {
            return dim_err("output row length differs from the state dimension");
        }
        let range = self.output_range(c)?;
        if i < self.last_ranges.len() {
            self.last_ranges[i] = Some(range);
        }
        let ms = match measurement_set(y, q, delta_v, c, Some(range)) {
            Ok(ms) => ms,
            Err(Error::EmptySet(msg)) => return Ok(self.recover(&msg)),
            Err(e) => return Err(e),
        };
        let strip = ms.as_strip().expect("clamped measurement sets are strips").clone();
        let updated = match self.intersect(&strip) {
            Ok(r) => r,
            Err(Error::EmptySet(msg)) => return Ok(self.recover(&msg)),
            Err(e) => return Err(e),
        };
        self.region = self.reduce(updated)?;
        self.stage = Stage::Corrected;
        self.range_cache = None;
        Ok(())
    }

    fn recover(&mut self, msg: &str) {
        warn!("step {}: empty intersection ({msg}); keeping the predicted set", self.k);
        self.empty_recoveries += 1;
        self.stage = Stage::Corrected;
    }

    fn intersect(&mut self, s: &Strip) -> Result<Region> {
        Ok(match (&self.config.kind, &self.region) {
            (EstimatorKind::Interval, Region::Interval(iv)) => {
                let b = s.bounds();
                let x = Interval::new(b.lo, b.hi)?.affine(1.0 / s.normal[0], 0.0);
                Region::Interval(iv.intersect(&x)?)
            }
            (EstimatorKind::Parallelotope, Region::Parallelotope(p)) => Region::Parallelotope(p.intersect_strip(s)?),
            (EstimatorKind::Zonotope { criterion, .. }, Region::Zonotope(z)) => {
                Region::Zonotope(z.intersect_strip(s, *criterion)?)
            }
            (EstimatorKind::Constrained { .. }, Region::Constrained(cz)) => Region::Constrained(cz.intersect_strip(s)?),
            (EstimatorKind::LastNStrips, Region::Parallelotope(_)) => {
                let mut strips = self.strips.clone();
                strips.push_back(s.clone());
                let drop = (0..strips.len() - 1)
                    .find(|&j| independent_without(&strips, j))
                    .ok_or(Error::Singular)?;
                strips.remove(drop);
                let p = Parallelotope::from_strips(strips.make_contiguous())?;
                self.strips = strips;
                Region::Parallelotope(p)
            }
            _ => unreachable!("state region matches the configured kind"),
        })
    }

    fn reduce(&self, r: Region) -> Result<Region> {
        Ok(match (&self.config.kind, r) {
            (EstimatorKind::Zonotope { max_order, .. }, Region::Zonotope(z)) => Region::Zonotope(z.reduce_order(*max_order)?),
            (
                EstimatorKind::Constrained {
                    max_order,
                    max_constraints,
                },
                Region::Constrained(c),
            ) => Region::Constrained(c.reduce(*max_order, *max_constraints)?),
            (_, r) => r,
        })
    }

    /// `Pi(k+1|k) ⊇ A Pi(k|k) + delta_w G B_inf`, then reduces.
    pub fn predict(&mut self, a: &Matrix, g: &Matrix, delta_w: f64) -> Result<()> {
        let next = match (&self.config.kind, &self.region) {
            (EstimatorKind::LastNStrips, Region::Parallelotope(p)) => {
                self.predicted_image = Some(p.to_zonotope().predict(a, g, delta_w)?);
                let lu_strips = self
                    .strips
                    .iter()
                    .map(|s| strip_propagate(s, a, g, delta_w))
                    .collect::<Result<VecDeque<_>>>()?;
                self.strips = lu_strips;
                Region::Parallelotope(Parallelotope::from_strips(self.strips.make_contiguous())?)
            }
            _ => self.region.affine_predict(a, g, delta_w)?,
        };
        self.region = self.reduce(next)?;
        self.k += 1;
        self.stage = Stage::Predicted;
        self.range_cache = None;
        Ok(())
    }

    pub fn state_bounds(&self) -> Result<StateBounds> {
        let hull = self.region.interval_hull()?;
        let half_widths = hull.iter().map(Interval::radius).collect();
        let par_radius = match &self.region {
            Region::Parallelotope(p) => Some(p.radius()),
            _ => None,
        };
        Ok(StateBounds {
            hull,
            half_widths,
            par_radius,
        })
    }

    /// Moves the set by `t`; used to keep worst-case rollouts centered.
    pub fn recenter(&mut self, t: &[f64]) {
        self.region = self.region.translate(t);
        self.strips = self.strips.iter().map(|s| s.translate(t)).collect();
        self.predicted_image = self.predicted_image.as_ref().map(|z| z.translate(t));
        self.range_cache = None;
    }
}

/// Whether the strips other than `skip` have linearly independent normals.
fn independent_without(strips: &VecDeque<Strip>, skip: usize) -> bool {
    let rows: Vec<Vec<f64>> = strips
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != skip)
        .map(|(_, s)| s.normal.clone())
        .collect();
    let scale: f64 = rows
        .iter()
        .map(|r| r.iter().map(|v| v * v).sum::<f64>().sqrt())
        .product();
    Matrix::from_rows(&rows)
        .and_then(|m| m.det())
        .map_or(false, |d| d.abs() > PIVOT_EPS.sqrt() * scale)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display_round_trip() {
        for s in ["interval", "par", "zon(2)", "zon(4,frobenius)", "cz(2,10)", "last-n-strips"] {
            let k: EstimatorKind = s.parse().unwrap();
            assert_eq!(k.to_string(), s);
        }
        assert_eq!("Zon( 6 )".parse::<EstimatorKind>().unwrap().to_string(), "zon(6)");
        assert!("zon(0.5)".parse::<EstimatorKind>().is_err());
        assert!("cz(2)".parse::<EstimatorKind>().is_err());
        assert!("ellipsoid".parse::<EstimatorKind>().is_err());
    }

    #[test]
    fn first_order_example_step() {
        let cfg = EstimatorConfig::adaptive(EstimatorKind::Interval);
        let mut st = EstimatorState::from_box(cfg, &[0.0], &[5.0], 1).unwrap();
        st.correct(0, 0, &Quantizer::new(1, 0.0, 1.0).unwrap(), &[1.0], 100.0).unwrap();
        st.predict(&Matrix::diag(&[2.0]), &Matrix::diag(&[1.0]), 1.0).unwrap();
        assert_eq!(st.region, Region::Interval(Interval::new(-11.0, 11.0).unwrap()));
        let q = st.select_thresholds(0, &[1.0], 2.0, 5).unwrap();
        assert_eq!(q.thresholds(), vec![-6.0, -3.0, 0.0, 3.0, 6.0]);
        for y in 0..=5 {
            let mut s = st.clone();
            s.correct(0, y, &q, &[1.0], 2.0).unwrap();
            let Region::Interval(iv) = s.region else { unreachable!() };
            assert!((iv.radius() - 3.5).abs() < 1e-12, "y = {y}: {iv:?}");
        }
    }

    #[test]
    fn zonotope_budget_after_predict() {
        let kind: EstimatorKind = "zon(2)".parse().unwrap();
        let mut st = EstimatorState::from_box(EstimatorConfig::adaptive(kind), &[0.0; 4], &[5.0; 4], 1).unwrap();
        let g = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 0.0], vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        for _ in 0..5 {
            st.predict(&Matrix::identity(4), &g, 0.2).unwrap();
            let Region::Zonotope(z) = &st.region else { unreachable!() };
            assert!(z.num_generators() <= 8);
        }
    }

    #[test]
    fn identity_prediction_keeps_set() {
        for kind in ["par", "zon(2)", "cz(2,3)"] {
            let kind: EstimatorKind = kind.parse().unwrap();
            let mut st =
                EstimatorState::from_box(EstimatorConfig::adaptive(kind), &[1.0, 2.0], &[1.0, 0.5], 1).unwrap();
            let before = st.state_bounds().unwrap();
            st.predict(&Matrix::identity(2), &Matrix::identity(2), 0.0).unwrap();
            let after = st.state_bounds().unwrap();
            for (a, b) in before.hull.iter().zip(&after.hull) {
                assert!((a.lo - b.lo).abs() < 1e-9 && (a.hi - b.hi).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn mismatched_initial_region_is_rejected() {
        let z = Region::Zonotope(Zonotope::from_box(vec![0.0], &[1.0]).unwrap());
        assert!(EstimatorState::init(EstimatorConfig::adaptive(EstimatorKind::Parallelotope), z, 1).is_err());
    }
}
