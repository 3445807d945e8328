//! First-order radius recursion and limits, the threshold count that
//! guarantees bounded uncertainty for general systems, and adversarial
//! rollouts.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{EstimatorConfig, EstimatorKind, EstimatorState};
use crate::numerics::{box_vertices, norm1, norm2, Matrix, Polynomial};
use crate::sim::LinearSystem;

/// `x(k+1) = a x(k) + w(k)` measured through a `d`-threshold quantizer.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FirstOrderModel {
    pub a: f64,
    pub delta_w: f64,
    pub delta_v: f64,
    pub d: usize,
}

/// Radius of the feasible interval after one predict/correct cycle with
/// optimally adapted thresholds and the worst reading.
pub fn radius_step(m: &FirstOrderModel, rho_prev: f64) -> f64 {
    let a = m.a.abs();
    let predicted = a * rho_prev + m.delta_w;
    if a * rho_prev <= m.delta_v - m.delta_w {
        predicted
    } else {
        (predicted + m.d as f64 * m.delta_v) / (m.d as f64 + 1.0)
    }
}

/// Resolution chosen by the optimal first-order law after radius `rho_prev`.
pub fn resolution_step(m: &FirstOrderModel, rho_prev: f64) -> Option<f64> {
    let slack = m.a.abs() * rho_prev + m.delta_w - m.delta_v;
    (slack > 0.0).then(|| 2.0 * slack / (m.d as f64 + 1.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Limits {
    pub rho: f64,
    /// `None` when the noise bound dominates and any resolution is optimal.
    pub delta: Option<f64>,
}

/// Limits of the radius and resolution sequences; requires `d > |a| - 1`.
pub fn asymptotic_limits(m: &FirstOrderModel) -> Result<Limits> {
    let a = m.a.abs();
    let d = m.d as f64;
    if d <= a - 1.0 {
        return Err(Error::ConditionViolated(format!(
            "d = {} <= |a| - 1 = {}: the radius grows without bound",
            m.d,
            a - 1.0
        )));
    }
    if a < 1.0 && m.delta_w <= (1.0 - a) * m.delta_v {
        return Ok(Limits {
            rho: m.delta_w / (1.0 - a),
            delta: None,
        });
    }
    Ok(Limits {
        rho: (m.delta_w + d * m.delta_v) / (d + 1.0 - a),
        delta: Some(2.0 * (m.delta_w + (a - 1.0) * m.delta_v) / (d + 1.0 - a)),
    })
}

/// Quantities of the threshold-count condition for general systems.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundednessReport {
    pub omega: Matrix,
    pub alpha: Vec<f64>,
    pub eta_star: f64,
    pub d_min: usize,
    pub d: Option<usize>,
    pub delta_inf: Option<f64>,
    pub beta: Option<Vec<f64>>,
    pub d_inf: Option<Vec<f64>>,
    pub rho_inf: Option<f64>,
}

const ETA_CAP: f64 = 1_125_899_906_842_624.0; // 2^50

/// `[c; c A^-1; ...; c A^{-n+1}]`.
pub fn inverse_observability(a: &Matrix, c: &[f64]) -> Result<Matrix> {
    let lu = a.lu()?;
    let n = a.rows();
    let mut rows = Vec::with_capacity(n);
    let mut r = c.to_vec();
    for _ in 0..n {
        rows.push(r.clone());
        r = lu.solve_transpose(&r)?;
    }
    Matrix::from_rows(&rows)
}

fn schur_at(alpha: &[f64], eta: f64) -> bool {
    let mut coeffs = vec![1.0];
    coeffs.extend(alpha.iter().map(|v| -eta * v.abs()));
    Polynomial::new(coeffs).expect("monic").is_schur()
}

/// `Omega`, `alpha = c A Omega^-1`, the Schur bound `eta*` of
/// `z^n - eta sum |alpha_i| z^{n-i}` and the least admissible `d`.
pub fn min_threshold_count(a: &Matrix, c: &[f64], tol: f64) -> Result<BoundednessReport> {
    if !a.is_square() || c.len() != a.rows() {
        return Err(Error::Dimension("A must be n x n and C of length n".into()));
    }
    let omega = inverse_observability(a, c)?;
    let omega_lu = omega.lu().map_err(|e| match e {
        Error::Singular => Error::Unobservable,
        other => other,
    })?;
    let ca = a.vec_mul(c);
    let alpha = omega_lu.solve_transpose(&ca)?;

    let mut lo = 0.0;
    let mut hi = 1.0;
    while schur_at(&alpha, hi) && hi < ETA_CAP {
        lo = hi;
        hi *= 2.0;
    }
    let eta_star = if schur_at(&alpha, hi) {
        hi
    } else {
        while hi - lo > tol * hi {
            let mid = 0.5 * (lo + hi);
            if schur_at(&alpha, mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };

    // d > 1/eta* - 1 holds iff q is Schur at eta = 1/(d+1); testing that
    // directly avoids rounding at integer boundaries.
    let mut d_min = 1;
    while !schur_at(&alpha, 1.0 / (d_min as f64 + 1.0)) {
        d_min += 1;
    }
    Ok(BoundednessReport {
        omega,
        alpha,
        eta_star,
        d_min,
        d: None,
        delta_inf: None,
        beta: None,
        d_inf: None,
        rho_inf: None,
    })
}

/// Adds the asymptotic resolution, the strip widths and the radius bound
/// for a specific `d`.
pub fn asymptotic_radius_bound(sys: &LinearSystem, output: usize, d: usize, tol: f64) -> Result<BoundednessReport> {
    let c = sys.c_row(output);
    let mut report = min_threshold_count(&sys.a, c, tol)?;
    if d < report.d_min {
        return Err(Error::ConditionViolated(format!(
            "d = {d} is below the required {}",
            report.d_min
        )));
    }
    let n = sys.n();
    let alpha1 = norm1(&report.alpha);
    if d as f64 + 1.0 <= alpha1 {
        warn!("d + 1 = {} does not exceed ||alpha||_1 = {alpha1}", d + 1);
        return Err(Error::ConditionViolated(format!(
            "d + 1 = {} <= ||alpha||_1 = {alpha1}",
            d + 1
        )));
    }

    let lu = sys.a.lu()?;
    // ||c A^{-(i+1)} G||_1 for i = 0..n-2
    let mut terms = Vec::with_capacity(n);
    let mut r = c.to_vec();
    for _ in 0..n.saturating_sub(1) {
        r = lu.solve_transpose(&r)?;
        terms.push(norm1(&sys.g.vec_mul(&r)));
    }
    let beta: Vec<f64> = (0..n).map(|h| terms[..h].iter().sum()).collect();

    let dw = sys.delta_w;
    let dv = sys.delta_v;
    let cg = norm1(&sys.g.vec_mul(c));
    let weighted: f64 = report.alpha.iter().zip(&beta).map(|(a, b)| a.abs() * b).sum();
    let delta_inf = (2.0 / (d as f64 + 1.0 - alpha1) * (dv * (alpha1 - 1.0) + dw * (cg + weighted))).max(0.0);
    let d_inf: Vec<f64> = beta.iter().map(|b| 0.5 * delta_inf + dv + dw * b).collect();

    let omega_inv = report.omega.inverse()?;
    let scaled = &omega_inv * &Matrix::diag(&d_inf);
    let rho_inf = box_vertices(n)
        .map(|w| norm2(&scaled.mul_vec(&w)))
        .fold(0.0, f64::max);

    report.d = Some(d);
    report.delta_inf = Some(delta_inf);
    report.beta = Some(beta);
    report.d_inf = Some(d_inf);
    report.rho_inf = Some(rho_inf);
    Ok(report)
}

/// Radii of a greedy adversarial rollout.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RolloutTrace {
    pub radii: Vec<f64>,
    /// Resolution of the first output's quantizer at each step.
    pub resolutions: Vec<f64>,
    pub bounded: bool,
}

/// Finite-horizon verdict: the largest radius over the last fifth of the
/// trace is at most ten times the median radius.
pub fn boundedness_verdict(radii: &[f64]) -> bool {
    if radii.is_empty() {
        return true;
    }
    if radii.iter().any(|r| !r.is_finite()) {
        return false;
    }
    let mut sorted = radii.to_vec();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    let tail_start = radii.len() - (radii.len() / 5).max(1);
    let tail_max = radii[tail_start..].iter().cloned().fold(0.0, f64::max);
    tail_max <= 10.0 * median
}

/// Adversarial rollout from `Pi(0|-1) = initial`: at each step thresholds
/// are adapted, every reading is tried, and the one with the largest
/// radius is kept. The set is shifted back to the origin after each step,
/// which leaves radii unchanged because every estimator is translation
/// equivariant.
pub fn worst_case_rollout(
    sys: &LinearSystem,
    kind: EstimatorKind,
    d: usize,
    steps: usize,
    initial_center: &[f64],
    initial_radii: &[f64],
) -> Result<RolloutTrace> {
    let mut st = EstimatorState::from_box(
        EstimatorConfig::adaptive(kind),
        initial_center,
        initial_radii,
        sys.outputs(),
    )?;
    let mut radii = Vec::with_capacity(steps);
    let mut resolutions = Vec::with_capacity(steps);
    for _ in 0..steps {
        for i in 0..sys.outputs() {
            let c = sys.c_row(i).to_vec();
            let q = st.select_thresholds(i, &c, sys.delta_v, d)?;
            if i == 0 {
                resolutions.push(q.resolution);
            }
            let mut best: Option<(f64, EstimatorState)> = None;
            for y in 0..=d {
                let mut cand = st.clone();
                cand.correct(i, y, &q, &c, sys.delta_v)?;
                let r = cand.region.radius()?;
                if best.as_ref().map_or(true, |(b, _)| r > *b) {
                    best = Some((r, cand));
                }
            }
            st = best.expect("d >= 1 gives a reading").1;
        }
        radii.push(st.region.radius()?);
        let center = st.region.hull_center()?;
        st.recenter(&center.iter().map(|v| -v).collect::<Vec<_>>());
        st.predict(&sys.a, &sys.g, sys.delta_w)?;
    }
    let bounded = boundedness_verdict(&radii);
    Ok(RolloutTrace {
        radii,
        resolutions,
        bounded,
    })
}

/// Smallest `d <= d_max` whose rollout is judged bounded.
pub fn empirical_min_d(
    sys: &LinearSystem,
    kind: EstimatorKind,
    steps: usize,
    d_max: usize,
    initial_center: &[f64],
    initial_radii: &[f64],
) -> Result<Option<usize>> {
    for d in 1..=d_max {
        if worst_case_rollout(sys, kind, d, steps, initial_center, initial_radii)?.bounded {
            return Ok(Some(d));
        }
    }
    Ok(None)
}

/// `A = [[a, 1], [0, a]]`-style Jordan block of size `n`, `C = e_1`, `G = I`.
pub fn jordan_system(a: f64, n: usize, delta_w: f64, delta_v: f64) -> Result<LinearSystem> {
    let mut m = Matrix::identity(n).scale(a);
    for i in 0..n.saturating_sub(1) {
        m[(i, i + 1)] = 1.0;
    }
    let mut c = vec![0.0; n];
    c[0] = 1.0;
    LinearSystem::new(m, Matrix::identity(n), Matrix::row_vector(&c), delta_w, delta_v)
}
