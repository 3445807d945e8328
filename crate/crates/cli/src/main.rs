//! `quantsm` command-line driver.
//!
//! Exit codes: 0 success, 1 other failure, 2 bad input (unreadable file,
//! schema or flag error), 3 containment violation, 4 unobservable pair.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use quantsm::analysis::{
    asymptotic_limits, asymptotic_radius_bound, jordan_system, min_threshold_count, worst_case_rollout,
    FirstOrderModel,
};
use quantsm::estimators::EstimatorKind;
use quantsm::sim::{output, run_campaign, run_episode_on, simulate_truth, LinearSystem, Mode, Scenario};
use quantsm::Error;

#[derive(Parser)]
#[command(name = "quantsm", version, about = "Set-membership estimation with adaptive quantized sensors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one or more runs of a single estimator and write per-step CSV.
    Run(RunArgs),
    /// Run every (estimator, d, mode) combination and write the tables.
    Campaign(CampaignArgs),
    /// Minimum threshold count for bounded uncertainty, optionally with the
    /// asymptotic radius bound.
    MinThresholds(MinThresholdsArgs),
    /// Asymptotic radius and resolution of the first-order recursion.
    Limits(LimitsArgs),
    /// Greedy adversarial rollout.
    WorstCase(WorstCaseArgs),
    /// Generate a random stable system as JSON.
    GenRandom(GenRandomArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Scenario JSON file.
    scenario: PathBuf,
    #[arg(long, default_value = "par")]
    estimator: String,
    #[arg(long, default_value_t = 5)]
    d: usize,
    #[arg(long, conflicts_with = "fixed")]
    adaptive: bool,
    #[arg(long)]
    fixed: bool,
    /// Overrides the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of runs to simulate, starting at run 0.
    #[arg(long, default_value_t = 1)]
    runs: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CampaignArgs {
    /// Scenario JSON file.
    scenario: PathBuf,
    /// Estimators, e.g. `par zon(2) cz(2,10)`; defaults to the scenario list.
    #[arg(long, num_args = 1..)]
    configs: Option<Vec<String>>,
    /// Comma-separated threshold counts.
    #[arg(long, value_delimiter = ',')]
    d_list: Option<Vec<usize>>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Cap on worker threads.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct SystemSource {
    /// System JSON file as written by `gen-random`.
    #[arg(long, conflicts_with = "jordan")]
    system_file: Option<PathBuf>,
    /// Jordan block `A = a I + N` of size `n` with `C = e_1`, `G = I`.
    #[arg(long, num_args = 2, value_names = ["A", "N"])]
    jordan: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0.05)]
    delta_w: f64,
    #[arg(long, default_value_t = 0.0)]
    delta_v: f64,
    /// Output row used for the analysis.
    #[arg(long, default_value_t = 0)]
    output: usize,
}

impl SystemSource {
    fn load(&self) -> anyhow::Result<LinearSystem> {
        match (&self.system_file, &self.jordan) {
            (Some(path), _) => {
                let text = read(path)?;
                let sys: LinearSystem = serde_json::from_str(&text)
                    .map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))?;
                Ok(LinearSystem::new(sys.a, sys.g, sys.c, sys.delta_w, sys.delta_v)?)
            }
            (None, Some(j)) => {
                let n = j[1];
                if n < 1.0 || n.fract() != 0.0 {
                    return Err(Error::InvalidArgument(format!("Jordan size {n} is not a positive integer")).into());
                }
                Ok(jordan_system(j[0], n as usize, self.delta_w, self.delta_v)?)
            }
            (None, None) => Err(Error::InvalidArgument("give --system-file or --jordan".into()).into()),
        }
    }
}

#[derive(Args)]
struct MinThresholdsArgs {
    #[command(flatten)]
    system: SystemSource,
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    /// Also compute the asymptotic radius bound for `--d`.
    #[arg(long, requires = "d")]
    bound: bool,
    #[arg(long)]
    d: Option<usize>,
}

#[derive(Args)]
struct LimitsArgs {
    #[arg(long, allow_hyphen_values = true)]
    a: f64,
    #[arg(long)]
    delta_w: f64,
    #[arg(long)]
    delta_v: f64,
    #[arg(long)]
    d: usize,
}

#[derive(Args)]
struct WorstCaseArgs {
    #[command(flatten)]
    system: SystemSource,
    #[arg(long, default_value = "last-n-strips")]
    estimator: String,
    #[arg(long)]
    d: usize,
    #[arg(long, default_value_t = 500)]
    steps: usize,
    /// Half-width of the initial box around the origin.
    #[arg(long, default_value_t = 0.1)]
    radius: f64,
}

#[derive(Args)]
struct GenRandomArgs {
    #[arg(long, default_value_t = 5)]
    n: usize,
    #[arg(long, default_value_t = 3)]
    m: usize,
    #[arg(long, default_value_t = 3)]
    p: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn read(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| anyhow!(Error::InvalidArgument(format!("{}: {e}", path.display()))))
}

fn write(path: &Path, text: &str) -> anyhow::Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn parse_kind(s: &str) -> anyhow::Result<EstimatorKind> {
    Ok(s.parse::<EstimatorKind>()?)
}

fn json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("value serializes")
}

fn cmd_run(args: RunArgs) -> anyhow::Result<()> {
    let mut scenario = Scenario::load(&args.scenario)?;
    if let Some(seed) = args.seed {
        scenario.seed = seed;
    }
    let kind = parse_kind(&args.estimator)?;
    let mode = if args.fixed { Mode::Fixed } else { Mode::Adaptive };
    let mut runs = Vec::with_capacity(args.runs);
    for run in 0..args.runs {
        let sys = scenario.system_for_run(run)?;
        let truth = simulate_truth(&sys, &scenario, run);
        runs.push(run_episode_on(&scenario, &sys, &truth, kind, mode, args.d, run)?);
    }
    write(&args.out, &output::run_csv(&runs)?)?;
    for m in &runs {
        eprintln!("run {}: mean uncertainty {:.6}", m.run, m.mean_uncertainty);
    }
    Ok(())
}

fn cmd_campaign(args: CampaignArgs) -> anyhow::Result<()> {
    let mut scenario = Scenario::load(&args.scenario)?;
    if let Some(configs) = &args.configs {
        scenario.estimators = configs.iter().map(|s| parse_kind(s)).collect::<anyhow::Result<_>>()?;
    }
    if let Some(d) = args.d_list {
        scenario.d_values = d;
    }
    if let Some(r) = args.runs {
        scenario.runs = r;
    }
    if let Some(s) = args.seed {
        scenario.seed = s;
    }
    let res = run_campaign(&scenario, args.threads)?;
    output::write_campaign(&res, &args.out_dir)?;
    println!("{}", output::summary_json(&res));
    Ok(())
}

fn cmd_min_thresholds(args: MinThresholdsArgs) -> anyhow::Result<()> {
    let sys = args.system.load()?;
    if args.system.output >= sys.outputs() {
        return Err(Error::InvalidArgument(format!("system has {} outputs", sys.outputs())).into());
    }
    let report = match (args.bound, args.d) {
        (true, Some(d)) => asymptotic_radius_bound(&sys, args.system.output, d, args.tol)?,
        _ => min_threshold_count(&sys.a, sys.c_row(args.system.output), args.tol)?,
    };
    println!("{}", json(&report));
    Ok(())
}

fn cmd_limits(args: LimitsArgs) -> anyhow::Result<()> {
    let model = FirstOrderModel {
        a: args.a,
        delta_w: args.delta_w,
        delta_v: args.delta_v,
        d: args.d,
    };
    println!("{}", json(&asymptotic_limits(&model)?));
    Ok(())
}

fn cmd_worst_case(args: WorstCaseArgs) -> anyhow::Result<()> {
    let sys = args.system.load()?;
    let kind = parse_kind(&args.estimator)?;
    let n = sys.n();
    let trace = worst_case_rollout(&sys, kind, args.d, args.steps, &vec![0.0; n], &vec![args.radius; n])?;
    println!("{}", json(&trace));
    Ok(())
}

fn cmd_gen_random(args: GenRandomArgs) -> anyhow::Result<()> {
    if args.n == 0 || args.m == 0 || args.p == 0 {
        return Err(Error::InvalidArgument("n, m and p must be positive".into()).into());
    }
    let text = json(&LinearSystem::random_stable(args.n, args.m, args.p, args.seed));
    match args.out {
        Some(path) => write(&path, &text),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::ContainmentViolation { .. }) => 3,
        Some(Error::Unobservable) => 4,
        Some(Error::InvalidArgument(_) | Error::Dimension(_)) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("error")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Campaign(a) => cmd_campaign(a),
        Command::MinThresholds(a) => cmd_min_thresholds(a),
        Command::Limits(a) => cmd_limits(a),
        Command::WorstCase(a) => cmd_worst_case(a),
        Command::GenRandom(a) => cmd_gen_random(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
