//! CSV and JSON emission. Every CSV starts with a `# quantsm <table> v<N>`
//! comment line; the version changes whenever the columns do.

use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::sim::campaign::CampaignResult;
use crate::sim::episode::RunMetrics;
use crate::sim::scenario::Mode;

pub const RUN_SCHEMA: &str = "# quantsm run v1";
pub const UNCERTAINTY_SCHEMA: &str = "# quantsm uncertainty v1";
pub const TIMINGS_SCHEMA: &str = "# quantsm timings v1";

fn csv_err(e: impl std::fmt::Display) -> Error {
    Error::InvalidArgument(format!("csv: {e}"))
}

fn to_table(schema: &str, header: Vec<String>, rows: Vec<Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header).map_err(csv_err)?;
    for r in rows {
        w.write_record(&r).map_err(csv_err)?;
    }
    let body = String::from_utf8(w.into_inner().map_err(csv_err)?).map_err(csv_err)?;
    Ok(format!("{schema}\n{body}"))
}

fn num(v: f64) -> String {
    format!("{v}")
}

/// Column names of the per-step CSV for `n` states and `p` outputs.
pub fn run_columns(n: usize, p: usize) -> Vec<String> {
    let mut h = vec!["run".to_string(), "k".to_string()];
    h.extend((1..=n).map(|j| format!("x{j}")));
    for j in 1..=n {
        h.push(format!("lo{j}"));
        h.push(format!("hi{j}"));
    }
    h.extend(["radius", "mean_half_width", "log_volume"].map(String::from));
    for i in 1..=p {
        h.push(format!("tau_c{i}"));
        h.push(format!("delta{i}"));
        h.push(format!("y{i}"));
    }
    h
}

/// One row per step per run.
pub fn run_csv(runs: &[RunMetrics]) -> Result<String> {
    let Some(first) = runs.first().and_then(|r| r.steps.first()) else {
        return Err(Error::InvalidArgument("no steps to write".into()));
    };
    let (n, p) = (first.truth.len(), first.y.len());
    let mut rows = Vec::new();
    for m in runs {
        for s in &m.steps {
            let mut r = vec![m.run.to_string(), s.k.to_string()];
            r.extend(s.truth.iter().copied().map(num));
            for iv in &s.hull {
                r.push(num(iv.lo));
                r.push(num(iv.hi));
            }
            r.extend([s.radius, s.mean_half_width, s.log_volume].map(num));
            for (q, y) in s.thresholds.iter().zip(&s.y) {
                r.push(num(q.center));
                r.push(num(q.resolution));
                r.push(y.to_string());
            }
            rows.push(r);
        }
    }
    to_table(RUN_SCHEMA, run_columns(n, p), rows)
}

/// Mean uncertainty with rows `d` and one column per estimator.
pub fn uncertainty_csv(res: &CampaignResult, mode: Mode) -> Result<String> {
    let mut header = vec!["d".to_string()];
    header.extend(res.estimators.iter().cloned());
    let rows = res
        .d_values
        .iter()
        .map(|&d| {
            let mut r = vec![d.to_string()];
            r.extend(
                res.estimators
                    .iter()
                    .map(|e| res.mean_uncertainty(e, mode, d).map_or_else(String::new, num)),
            );
            r
        })
        .collect();
    to_table(UNCERTAINTY_SCHEMA, header, rows)
}

pub fn timings_csv(res: &CampaignResult) -> Result<String> {
    let header = ["estimator", "seconds_per_step", "relative"].map(String::from).to_vec();
    let rows = res
        .timings
        .iter()
        .map(|t| vec![t.estimator.clone(), num(t.seconds_per_step), num(t.relative)])
        .collect();
    to_table(TIMINGS_SCHEMA, header, rows)
}

#[derive(Serialize)]
struct Summary<'a> {
    schema: &'static str,
    scenario: &'a str,
    cells: &'a [crate::sim::campaign::CampaignCell],
    timings: &'a [crate::sim::campaign::Timing],
    timing_reference: &'a str,
}

/// Aggregates only; per-episode summaries are left out.
pub fn summary_json(res: &CampaignResult) -> String {
    serde_json::to_string_pretty(&Summary {
        schema: "quantsm summary v1",
        scenario: &res.scenario,
        cells: &res.cells,
        timings: &res.timings,
        timing_reference: &res.timing_reference,
    })
    .expect("summary serializes")
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))
}

/// Writes `uncertainty_<mode>.csv` for each mode, `timings.csv` and
/// `summary.json` into `dir`.
pub fn write_campaign(res: &CampaignResult, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::InvalidArgument(format!("{}: {e}", dir.display())))?;
    for &mode in &res.modes {
        write(&dir.join(format!("uncertainty_{}.csv", mode.name())), &uncertainty_csv(res, mode)?)?;
    }
    write(&dir.join("timings.csv"), &timings_csv(res)?)?;
    write(&dir.join("summary.json"), &summary_json(res))
}
