use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimators::EstimatorKind;
use crate::sim::episode::{run_episode_on, simulate_truth, RunMetrics};
use crate::sim::scenario::{Mode, Scenario};

/// Summary of one episode kept after the campaign drops per-step records.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EpisodeSummary {
    pub estimator: String,
    pub mode: Mode,
    pub d: usize,
    pub run: usize,
    pub mean_uncertainty: f64,
    pub mean_step_seconds: f64,
    pub empty_recoveries: usize,
}

impl From<&RunMetrics> for EpisodeSummary {
    fn from(m: &RunMetrics) -> Self {
        Self {
            estimator: m.estimator.clone(),
            mode: m.mode,
            d: m.d,
            run: m.run,
            mean_uncertainty: m.mean_uncertainty,
            mean_step_seconds: m.mean_step_seconds(),
            empty_recoveries: m.empty_recoveries,
        }
    }
}

/// Mean uncertainty of one `(estimator, d, mode)` cell over all runs.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CampaignCell {
    pub estimator: String,
    pub mode: Mode,
    pub d: usize,
    pub mean_uncertainty: f64,
    pub runs: usize,
    pub empty_recoveries: usize,
}

/// Per-iteration time of one estimator, absolute and relative to `par`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Timing {
    pub estimator: String,
    pub seconds_per_step: f64,
    pub relative: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CampaignResult {
    pub scenario: String,
    pub estimators: Vec<String>,
    pub d_values: Vec<usize>,
    pub modes: Vec<Mode>,
    pub cells: Vec<CampaignCell>,
    pub timings: Vec<Timing>,
    /// Name of the estimator timings are normalized to.
    pub timing_reference: String,
    pub episodes: Vec<EpisodeSummary>,
}

impl CampaignResult {
    pub fn cell(&self, estimator: &str, mode: Mode, d: usize) -> Option<&CampaignCell> {
        self.cells
            .iter()
            .find(|c| c.estimator == estimator && c.mode == mode && c.d == d)
    }

    pub fn mean_uncertainty(&self, estimator: &str, mode: Mode, d: usize) -> Option<f64> {
        self.cell(estimator, mode, d).map(|c| c.mean_uncertainty)
    }
}

#[derive(Clone, Copy, Debug)]
struct Task {
    run: usize,
    est: usize,
    d: usize,
    mode: Mode,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Runs every `(run, estimator, d, mode)` combination of the scenario.
/// Each run shares one truth realization across configurations; results
/// are merged in task order, so they do not depend on `threads`.
pub fn run_campaign(scenario: &Scenario, threads: Option<usize>) -> Result<CampaignResult> {
    scenario.validate()?;
    let mut tasks = Vec::new();
    for run in 0..scenario.runs {
        for est in 0..scenario.estimators.len() {
            for &d in &scenario.d_values {
                for &mode in &scenario.modes {
                    tasks.push(Task { run, est, d, mode });
                }
            }
        }
    }

    let execute = || -> Result<Vec<EpisodeSummary>> {
        let truths = (0..scenario.runs)
            .into_par_iter()
            .map(|run| {
                let sys = scenario.system_for_run(run)?;
                let truth = simulate_truth(&sys, scenario, run);
                Ok((sys, truth))
            })
            .collect::<Result<Vec<_>>>()?;
        tasks
            .par_iter()
            .map(|t| {
                let (sys, truth) = &truths[t.run];
                let kind = scenario.estimators[t.est];
                run_episode_on(scenario, sys, truth, kind, t.mode, t.d, t.run).map(|m| EpisodeSummary::from(&m))
            })
            .collect()
    };
    let episodes = match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?
            .install(execute)?,
        None => execute()?,
    };

    let names: Vec<String> = scenario.estimators.iter().map(EstimatorKind::to_string).collect();
    let mut cells = Vec::new();
    for &mode in &scenario.modes {
        for name in &names {
            for &d in &scenario.d_values {
                let sel: Vec<&EpisodeSummary> = episodes
                    .iter()
                    .filter(|e| &e.estimator == name && e.mode == mode && e.d == d)
                    .collect();
                cells.push(CampaignCell {
                    estimator: name.clone(),
                    mode,
                    d,
                    mean_uncertainty: sel.iter().map(|e| e.mean_uncertainty).sum::<f64>() / sel.len() as f64,
                    runs: sel.len(),
                    empty_recoveries: sel.iter().map(|e| e.empty_recoveries).sum(),
                });
            }
        }
    }

    let per_step: Vec<f64> = names
        .iter()
        .map(|name| {
            median(
                episodes
                    .iter()
                    .filter(|e| &e.estimator == name)
                    .map(|e| e.mean_step_seconds)
                    .collect(),
            )
        })
        .collect();
    let reference = names.iter().position(|n| n == "par").unwrap_or(0);
    let timings = names
        .iter()
        .zip(&per_step)
        .map(|(name, &s)| Timing {
            estimator: name.clone(),
            seconds_per_step: s,
            relative: s / per_step[reference],
        })
        .collect();

    Ok(CampaignResult {
        scenario: scenario.name.clone(),
        estimators: names.clone(),
        d_values: scenario.d_values.clone(),
        modes: scenario.modes.clone(),
        cells,
        timings,
        timing_reference: names[reference].clone(),
        episodes,
    })
}
