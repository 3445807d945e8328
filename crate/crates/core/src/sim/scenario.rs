use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::EstimatorKind;
use crate::numerics::Matrix;
use crate::sim::LinearSystem;

/// Where the plant comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SystemSpec {
    DoubleOscillator,
    /// Discrete-time matrices given directly.
    Matrices {
        a: Matrix,
        g: Matrix,
        c: Matrix,
        delta_w: f64,
        delta_v: f64,
    },
    /// Continuous-time matrices, sampled with zero-order hold.
    Continuous {
        a: Matrix,
        g: Matrix,
        c: Matrix,
        ts: f64,
        delta_w: f64,
        delta_v: f64,
    },
    /// A fresh random stable system per run, seeded with `seed + run`.
    RandomStable { n: usize, m: usize, p: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitialBox {
    pub center: Vec<f64>,
    pub radii: Vec<f64>,
}

impl InitialBox {
    pub fn cube(n: usize, radius: f64) -> Self {
        Self {
            center: vec![0.0; n],
            radii: vec![radius; n],
        }
    }
}

/// Process disturbance realization, always within `||w||_inf <= delta_w`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Disturbance {
    /// i.i.d. uniform on `[-delta_w, delta_w]^m`.
    Uniform,
    /// Per channel, `count` sinusoids with random frequency in `(0, pi)` and
    /// phase, total amplitude `deterministic_fraction * delta_w`, plus
    /// uniform noise filling the rest of the bound.
    Sinusoids { count: usize, deterministic_fraction: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Adaptive,
    Fixed,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Adaptive => "adaptive",
            Mode::Fixed => "fixed",
        }
    }
}

/// Placement of constant thresholds in fixed mode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FixedThresholds {
    /// `d` thresholds equally spaced on `[lo, hi]`, ends included.
    Range { lo: f64, hi: f64 },
    /// Same, on the range of each noise-free output over the run.
    ExactOutputRange,
}

/// Averaging window `start <= k < end`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub start: usize,
    pub end: usize,
}

fn default_runs() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    #[serde(default)]
    pub name: String,
    pub system: SystemSpec,
    pub horizon: usize,
    pub initial_box: InitialBox,
    pub disturbance: Disturbance,
    pub estimators: Vec<EstimatorKind>,
    pub d_values: Vec<usize>,
    pub modes: Vec<Mode>,
    pub fixed_thresholds: FixedThresholds,
    pub seed: u64,
    #[serde(default = "default_runs")]
    pub runs: usize,
    pub window: Window,
}

impl Scenario {
    /// Sampled two-mass oscillator, `x(0)` in `5 B_inf`, 200 steps averaged
    /// over `50 <= k < 200`, 10 runs.
    pub fn double_oscillator() -> Self {
        Self {
            name: "double_oscillator".into(),
            system: SystemSpec::DoubleOscillator,
            horizon: 200,
            initial_box: InitialBox::cube(4, 5.0),
            disturbance: Disturbance::Uniform,
            estimators: ["par", "zon(2)", "zon(4)", "zon(6)", "cz(2,10)", "cz(4,10)", "cz(6,10)"]
                .iter()
                .map(|s| s.parse().expect("valid estimator"))
                .collect(),
            d_values: vec![3, 5, 10, 15, 20],
            modes: vec![Mode::Adaptive, Mode::Fixed],
            fixed_thresholds: FixedThresholds::Range { lo: -5.0, hi: 5.0 },
            seed: 20240501,
            runs: 10,
            window: Window { start: 50, end: 200 },
        }
    }

    /// 100 random stable 5-state, 3-input, 3-output systems, 100 steps each.
    pub fn random_systems() -> Self {
        Self {
            name: "random_systems".into(),
            system: SystemSpec::RandomStable { n: 5, m: 3, p: 3 },
            horizon: 100,
            initial_box: InitialBox::cube(5, 5.0),
            disturbance: Disturbance::Sinusoids {
                count: 3,
                deterministic_fraction: 0.7,
            },
            estimators: ["par", "zon(2)", "zon(4)", "cz(2,5)", "cz(4,5)"]
                .iter()
                .map(|s| s.parse().expect("valid estimator"))
                .collect(),
            d_values: vec![3, 5, 10, 15, 20],
            modes: vec![Mode::Adaptive, Mode::Fixed],
            fixed_thresholds: FixedThresholds::ExactOutputRange,
            seed: 20240502,
            runs: 100,
            window: Window { start: 0, end: 100 },
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let s: Scenario =
            serde_json::from_str(text).map_err(|e| Error::InvalidArgument(format!("scenario: {e}")))?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.horizon == 0 {
            return bad("horizon must be at least 1".into());
        }
        if self.runs == 0 {
            return bad("runs must be at least 1".into());
        }
        if self.d_values.iter().any(|&d| d == 0) {
            return bad("every d must be at least 1".into());
        }
        let n = self.system_for_run(0)?.n();
        let b = &self.initial_box;
        if b.center.len() != n || b.radii.len() != n {
            return bad(format!("initial box must have {n} coordinates"));
        }
        if b.radii.iter().any(|r| !(*r > 0.0)) {
            return bad("initial box radii must be positive".into());
        }
        if let Disturbance::Sinusoids {
            deterministic_fraction,
            ..
        } = self.disturbance
        {
            if !(0.0..=1.0).contains(&deterministic_fraction) {
                return bad("deterministic_fraction must lie in [0, 1]".into());
            }
        }
        if let FixedThresholds::Range { lo, hi } = self.fixed_thresholds {
            if !(hi > lo) {
                return bad(format!("fixed threshold range [{lo}, {hi}] is empty"));
            }
        }
        if self.window.start >= self.window.end {
            return bad("averaging window is empty".into());
        }
        Ok(())
    }

    /// Seed of the random system used in run `run`.
    pub fn system_seed(&self, run: usize) -> u64 {
        self.seed.wrapping_add(run as u64)
    }

    pub fn system_for_run(&self, run: usize) -> Result<LinearSystem> {
        match &self.system {
            SystemSpec::DoubleOscillator => Ok(LinearSystem::double_oscillator()),
            SystemSpec::Matrices {
                a,
                g,
                c,
                delta_w,
                delta_v,
            } => LinearSystem::new(a.clone(), g.clone(), c.clone(), *delta_w, *delta_v),
            SystemSpec::Continuous {
                a,
                g,
                c,
                ts,
                delta_w,
                delta_v,
            } => LinearSystem::from_continuous(a, g, c.clone(), *ts, *delta_w, *delta_v),
            SystemSpec::RandomStable { n, m, p } => {
                Ok(LinearSystem::random_stable(*n, *m, *p, self.system_seed(run)))
            }
        }
    }

    /// Window clipped to the horizon.
    pub fn effective_window(&self) -> Window {
        Window {
            start: self.window.start.min(self.horizon.saturating_sub(1)),
            end: self.window.end.min(self.horizon),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_round_trip() {
        for s in [Scenario::double_oscillator(), Scenario::random_systems()] {
            s.validate().unwrap();
            let back = Scenario::from_json(&s.to_json()).unwrap();
            assert_eq!(back, s);
        }
    }

    #[test]
    fn schema_errors_are_reported() {
        assert!(Scenario::from_json("{}").is_err());
        let mut s = Scenario::double_oscillator();
        s.initial_box = InitialBox::cube(3, 5.0);
        assert!(Scenario::from_json(&s.to_json()).is_err());
        let text = Scenario::double_oscillator().to_json().replace("\"par\"", "\"ellipsoid\"");
        assert!(Scenario::from_json(&text).is_err());
    }
}
