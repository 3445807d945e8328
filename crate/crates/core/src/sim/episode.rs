use std::f64::consts::PI;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimators::{EstimatorConfig, EstimatorKind, EstimatorState};
use crate::geometry::Interval;
use crate::quantizer::Quantizer;
use crate::sim::scenario::{Disturbance, FixedThresholds, Mode, Scenario};
use crate::sim::LinearSystem;

/// True trajectory, disturbances and measured outputs
/// `z_i(k) = C_i x(k) + v_i(k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Truth {
    pub states: Vec<Vec<f64>>,
    pub disturbances: Vec<Vec<f64>>,
    pub outputs: Vec<Vec<f64>>,
}

impl Truth {
    /// Range of output `i` over the whole run.
    pub fn output_range(&self, i: usize) -> (f64, f64) {
        self.outputs
            .iter()
            .map(|z| z[i])
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
    }
}

/// Seed of the truth realization of run `run`, shared by every estimator
/// configuration so that they see the same data.
pub fn cell_seed(seed: u64, run: usize) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ (run as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn uniform(rng: &mut ChaCha8Rng, r: f64) -> f64 {
    if r > 0.0 {
        rng.gen_range(-r..=r)
    } else {
        0.0
    }
}

pub fn simulate_truth(sys: &LinearSystem, scenario: &Scenario, run: usize) -> Truth {
    let mut rng = ChaCha8Rng::seed_from_u64(cell_seed(scenario.seed, run));
    let b = &scenario.initial_box;
    let mut x: Vec<f64> = b
        .center
        .iter()
        .zip(&b.radii)
        .map(|(c, r)| c + uniform(&mut rng, *r))
        .collect();

    let m = sys.inputs();
    // (amplitude, frequency, phase) per channel
    let waves: Vec<Vec<(f64, f64, f64)>> = match scenario.disturbance {
        Disturbance::Uniform => vec![Vec::new(); m],
        Disturbance::Sinusoids {
            count,
            deterministic_fraction,
        } => (0..m)
            .map(|_| {
                let raw: Vec<(f64, f64, f64)> = (0..count)
                    .map(|_| {
                        let amp: f64 = rng.gen_range(0.1..1.0);
                        let freq = rng.gen_range(0.0..PI);
                        let phase = rng.gen_range(0.0..2.0 * PI);
                        (amp, freq, phase)
                    })
                    .collect();
                let total: f64 = raw.iter().map(|w| w.0).sum();
                let scale = if total > 0.0 {
                    deterministic_fraction * sys.delta_w / total
                } else {
                    0.0
                };
                raw.into_iter().map(|(a, f, p)| (a * scale, f, p)).collect()
            })
            .collect(),
    };
    let noise_w = match scenario.disturbance {
        Disturbance::Uniform => sys.delta_w,
        Disturbance::Sinusoids {
            deterministic_fraction,
            ..
        } => (1.0 - deterministic_fraction) * sys.delta_w,
    };

    let mut states = Vec::with_capacity(scenario.horizon);
    let mut outputs = Vec::with_capacity(scenario.horizon);
    let mut disturbances = Vec::with_capacity(scenario.horizon);
    for k in 0..scenario.horizon {
        let z = (0..sys.outputs())
            .map(|i| sys.output(i, &x) + uniform(&mut rng, sys.delta_v))
            .collect();
        let w: Vec<f64> = waves
            .iter()
            .map(|ch| {
                let det: f64 = ch.iter().map(|(a, f, p)| a * (f * k as f64 + p).sin()).sum();
                (det + uniform(&mut rng, noise_w)).clamp(-sys.delta_w, sys.delta_w)
            })
            .collect();
        let next = sys.step(&x, &w);
        states.push(std::mem::replace(&mut x, next));
        outputs.push(z);
        disturbances.push(w);
    }
    Truth {
        states,
        disturbances,
        outputs,
    }
}

/// Bookkeeping of one step, taken after the last correction.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepRecord {
    pub k: usize,
    pub truth: Vec<f64>,
    pub hull: Vec<Interval>,
    pub radius: f64,
    pub mean_half_width: f64,
    /// Natural log of the set volume; for constrained zonotopes, of the
    /// interval-hull volume.
    pub log_volume: f64,
    pub thresholds: Vec<Quantizer>,
    pub y: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunMetrics {
    pub estimator: String,
    pub mode: Mode,
    pub d: usize,
    pub run: usize,
    pub steps: Vec<StepRecord>,
    /// Wall time of each step in seconds (threshold selection, corrections
    /// and prediction).
    pub step_seconds: Vec<f64>,
    pub empty_recoveries: usize,
    /// Mean half-width over the averaging window and the coordinates.
    pub mean_uncertainty: f64,
}

impl RunMetrics {
    pub fn mean_step_seconds(&self) -> f64 {
        self.step_seconds.iter().sum::<f64>() / self.step_seconds.len().max(1) as f64
    }
}

/// Constant quantizers for fixed mode.
pub fn fixed_quantizers(scenario: &Scenario, truth: &Truth, outputs: usize, d: usize) -> Result<Vec<Quantizer>> {
    (0..outputs)
        .map(|i| match scenario.fixed_thresholds {
            FixedThresholds::Range { lo, hi } => Quantizer::spanning(lo, hi, d),
            FixedThresholds::ExactOutputRange => {
                let (lo, hi) = truth.output_range(i);
                let hi = if hi > lo { hi } else { lo + 1e-9 };
                Quantizer::spanning(lo, hi, d)
            }
        })
        .collect()
}

/// One closed-loop run of estimator `kind` with `d` thresholds per output.
pub fn run_episode(scenario: &Scenario, kind: EstimatorKind, mode: Mode, d: usize, run: usize) -> Result<RunMetrics> {
    let sys = scenario.system_for_run(run)?;
    let truth = simulate_truth(&sys, scenario, run);
    run_episode_on(scenario, &sys, &truth, kind, mode, d, run)
}

/// [`run_episode`] on a precomputed system and truth.
pub fn run_episode_on(
    scenario: &Scenario,
    sys: &LinearSystem,
    truth: &Truth,
    kind: EstimatorKind,
    mode: Mode,
    d: usize,
    run: usize,
) -> Result<RunMetrics> {
    let p = sys.outputs();
    let config = match mode {
        Mode::Adaptive => EstimatorConfig::adaptive(kind),
        Mode::Fixed => EstimatorConfig::fixed(kind, fixed_quantizers(scenario, truth, p, d)?),
    };
    let b = &scenario.initial_box;
    let mut st = EstimatorState::from_box(config, &b.center, &b.radii, p)?;
    let rows: Vec<Vec<f64>> = (0..p).map(|i| sys.c_row(i).to_vec()).collect();

    let horizon = truth.states.len();
    let mut steps = Vec::with_capacity(horizon);
    let mut step_seconds = Vec::with_capacity(horizon);
    for k in 0..horizon {
        let t0 = Instant::now();
        let mut thresholds = Vec::with_capacity(p);
        let mut ys = Vec::with_capacity(p);
        for (i, c) in rows.iter().enumerate() {
            let q = st.select_thresholds(i, c, sys.delta_v, d)?;
            let y = q.quantize(truth.outputs[k][i]);
            st.correct(i, y, &q, c, sys.delta_v)?;
            thresholds.push(q);
            ys.push(y);
        }
        let mut elapsed = t0.elapsed().as_secs_f64();

        let x = &truth.states[k];
        if !st.region.contains(x) {
            return Err(Error::ContainmentViolation {
                step: k,
                run,
                estimator: kind.to_string(),
            });
        }
        let bounds = st.state_bounds()?;
        let volume = st.region.volume()?.value;
        steps.push(StepRecord {
            k,
            truth: x.clone(),
            radius: bounds.par_radius.map_or_else(|| st.region.radius(), Ok)?,
            mean_half_width: bounds.mean_half_width(),
            hull: bounds.hull,
            log_volume: volume.ln(),
            thresholds,
            y: ys,
        });

        if k + 1 < horizon {
            let t1 = Instant::now();
            st.predict(&sys.a, &sys.g, sys.delta_w)?;
            elapsed += t1.elapsed().as_secs_f64();
        }
        step_seconds.push(elapsed);
    }

    let w = scenario.effective_window();
    let window = &steps[w.start..w.end.min(steps.len())];
    let mean_uncertainty = window.iter().map(|s| s.mean_half_width).sum::<f64>() / window.len() as f64;
    Ok(RunMetrics {
        estimator: kind.to_string(),
        mode,
        d,
        run,
        steps,
        step_seconds,
        empty_recoveries: st.empty_recoveries,
        mean_uncertainty,
    })
}
