//! One test per acceptance criterion. Each prints a `PASS`/`FAIL` line
//! (run with `--nocapture` to see them) and then asserts.

mod common;

use std::sync::OnceLock;
use std::time::{Duration, Instant};

use common::*;
use quantsm::analysis::{
    asymptotic_radius_bound, jordan_system, min_threshold_count, radius_step, resolution_step, worst_case_rollout,
    FirstOrderModel,
};
use quantsm::estimators::{EstimatorConfig, EstimatorKind, EstimatorState};
use quantsm::geometry::{strip_propagate, ConstrainedZonotope, Interval, Region, Strip, Zonotope};
use quantsm::numerics::{Direction, LinearProgram, Matrix};
use quantsm::quantizer::{adapt_first_order, measurement_set};
use quantsm::sim::{run_campaign, CampaignResult, LinearSystem, Mode, Scenario};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(id: u32, name: &str, ok: bool, took: Duration, detail: &str) {
    println!(
        "{} criterion {id} ({name}) [{:.1}s]: {detail}",
        if ok { "PASS" } else { "FAIL" },
        took.as_secs_f64()
    );
    assert!(ok, "criterion {id} ({name}): {detail}");
}

fn kind(s: &str) -> EstimatorKind {
    s.parse().unwrap()
}

/// Radius recursion of the first-order estimator, written out directly.
fn recursion(a: f64, dw: f64, dv: f64, d: usize, rho: f64) -> f64 {
    if rho <= (dv - dw) / a {
        a * rho + dw
    } else {
        (a * rho + dw + d as f64 * dv) / (d as f64 + 1.0)
    }
}

#[test]
fn criterion_01_first_order_exactness() {
    let t = Instant::now();
    let (a, dw, dv, d) = (2.0, 1.0, 2.0, 5);
    let sys = LinearSystem::new(Matrix::diag(&[a]), Matrix::diag(&[1.0]), Matrix::diag(&[1.0]), dw, dv).unwrap();

    // Worked example: corrected [-5, 5] at k-1.
    let mut st = EstimatorState::from_box(EstimatorConfig::adaptive(kind("interval")), &[0.0], &[5.0], 1).unwrap();
    st.stage = quantsm::estimators::Stage::Corrected;
    st.predict(&sys.a, &sys.g, dw).unwrap();
    let Region::Interval(pred) = st.region.clone() else { panic!("interval region") };
    let q = st.select_thresholds(0, &[1.0], dv, d).unwrap();
    let law = adapt_first_order(a, Interval::centered(0.0, 5.0), dw, dv, d).unwrap();
    let mut ok = pred == Interval::new(-11.0, 11.0).unwrap()
        && q.center == 0.0
        && q.resolution == 3.0
        && q.thresholds() == vec![-6.0, -3.0, 0.0, 3.0, 6.0]
        && law == q;
    let mut radii = Vec::new();
    for y in 0..=d {
        let mut c = st.clone();
        c.correct(0, y, &q, &[1.0], dv).unwrap();
        radii.push(c.region.radius().unwrap());
    }
    ok &= radii.iter().all(|&r| r == 3.5);

    // Greedy worst case against the recursion over 100 steps.
    let trace = worst_case_rollout(&sys, kind("interval"), d, 100, &[0.0], &[11.0]).unwrap();
    let mut rho = 3.5;
    let mut err: f64 = 0.0;
    for (k, &r) in trace.radii.iter().enumerate() {
        if k > 0 {
            rho = recursion(a, dw, dv, d, rho);
        }
        err = err.max((r - rho).abs());
    }
    ok &= err < 1e-12 && trace.radii.len() == 100;
    report(
        1,
        "first-order exactness",
        ok,
        t.elapsed(),
        &format!("example thresholds {:?}, corrected radii {radii:?}, max recursion error {err:.2e}", q.thresholds()),
    );
}

#[test]
fn criterion_02_asymptotic_limits() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut worst_rho, mut worst_delta, mut with_delta) = (0.0f64, 0.0f64, 0);
    for _ in 0..100 {
        let d = rng.gen_range(1..=20usize);
        let a = rng.gen_range(0.05..(d as f64 + 0.9).min(6.0));
        let m = FirstOrderModel {
            a,
            delta_w: rng.gen_range(0.01..2.0),
            delta_v: rng.gen_range(0.0..2.0),
            d,
        };
        let (dw, dv, df) = (m.delta_w, m.delta_v, d as f64);
        let rho_lim = if dw <= (1.0 - a) * dv {
            dw / (1.0 - a)
        } else {
            (dw + df * dv) / (df + 1.0 - a)
        };
        let mut rho = rng.gen_range(0.0..10.0);
        for _ in 0..200_000 {
            let next = radius_step(&m, rho);
            if next == rho {
                break;
            }
            rho = next;
        }
        worst_rho = worst_rho.max((rho - rho_lim).abs());
        if dw > (1.0 - a) * dv {
            let delta_lim = 2.0 * (dw + (a - 1.0) * dv) / (df + 1.0 - a);
            let delta = resolution_step(&m, rho).unwrap();
            worst_delta = worst_delta.max((delta - delta_lim).abs());
            with_delta += 1;
        }
    }
    report(
        2,
        "asymptotic limits",
        worst_rho < 1e-9 && worst_delta < 1e-9,
        t.elapsed(),
        &format!("max |rho - limit| {worst_rho:.2e}, max |Delta - limit| {worst_delta:.2e} over {with_delta} models"),
    );
}

#[test]
fn criterion_03_threshold_count() {
    let t = Instant::now();
    let mut lines = Vec::new();
    let mut ok = true;
    for a in [1.1, 1.5, 2.0, 2.5, 3.0, 4.0] {
        let got = min_threshold_count(&Matrix::diag(&[a]), &[1.0], 1e-12).unwrap().d_min;
        let want = (a - 1.0f64).floor() as usize + 1;
        ok &= got == want;
        lines.push(format!("n=1 a={a}: {got}/{want}"));
    }
    // Jury conditions on z^2 - eta (2a z + a^2), eta = 1/(d+1), reduce to
    // d > a^2 + 2a - 1.
    for a in [1.5, 2.0, 2.3, 3.0] {
        let sys = jordan_system(a, 2, 0.05, 0.0).unwrap();
        let got = min_threshold_count(&sys.a, sys.c_row(0), 1e-12).unwrap().d_min;
        let want = (a * a + 2.0 * a - 1.0f64).floor() as usize + 1;
        ok &= got == want;
        lines.push(format!("jordan a={a}: {got}/{want}"));
    }
    report(3, "threshold count", ok, t.elapsed(), &lines.join(", "));
}

#[test]
fn criterion_04_threshold_count_soundness() {
    let t = Instant::now();
    let sys = jordan_system(2.3, 2, 0.05, 0.0).unwrap();
    let d_min = min_threshold_count(&sys.a, sys.c_row(0), 1e-12).unwrap().d_min;
    let bound = asymptotic_radius_bound(&sys, 0, d_min, 1e-12).unwrap().rho_inf.unwrap();
    let lns = kind("last-n-strips");
    let at = worst_case_rollout(&sys, lns, d_min, 500, &[0.0, 0.0], &[0.1, 0.1]).unwrap();
    let tail = at.radii[400..].iter().cloned().fold(0.0, f64::max);

    // Smallest d whose rollout is bounded, then one less. Small d can
    // overflow before the horizon, which counts as unbounded.
    let mut threshold = None;
    for d in 1..=d_min {
        if worst_case_rollout(&sys, lns, d, 500, &[0.0, 0.0], &[0.1, 0.1]).is_ok_and(|t| t.bounded) {
            threshold = Some(d);
            break;
        }
    }
    let below = threshold.unwrap_or(d_min).saturating_sub(1).max(1);
    let under = worst_case_rollout(&sys, lns, below, 500, &[0.0, 0.0], &[0.1, 0.1]).unwrap();
    let growth = (under.radii[499] / under.radii[399]).powf(0.01);
    let ok = at.bounded && tail <= bound + 1e-6 && !under.bounded && growth > 1.01;
    report(
        4,
        "threshold count soundness",
        ok,
        t.elapsed(),
        &format!(
            "d_min {d_min}: tail radius {tail:.4} <= rho_inf {bound:.4}; empirical threshold {threshold:?}; d={below} grows x{growth:.3}/step"
        ),
    );
}

#[test]
fn criterion_05_strip_image_equality() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut outside, mut unreachable) = (0usize, 0usize);
    for inst in 0..50 {
        let n = 2 + inst % 2;
        let m = rng.gen_range(1..=3);
        let a = random_invertible(&mut rng, n);
        let g = random_matrix(&mut rng, n, m);
        let gamma = rng.gen_range(0.0..2.0);
        let s = Strip::new((0..n).map(|_| rng.gen_range(-2.0..2.0)).collect(), rng.gen_range(-1.0..1.0)).unwrap();
        let out = strip_propagate(&s, &a, &g, gamma).unwrap();
        let pp = dot(&s.normal, &s.normal);
        for _ in 0..10_000 {
            let mut y: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let shift = rng.gen_range(-1.0..1.0) - (dot(&s.normal, &y) - s.center);
            y.iter_mut().zip(&s.normal).for_each(|(yi, pi)| *yi += shift * pi / pp);
            let w: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let x: Vec<f64> = a.mul_vec(&y).iter().zip(g.mul_vec(&w)).map(|(ay, gi)| ay + gamma * gi).collect();
            outside += usize::from(!out.contains(&x, 1e-9));
        }
        let qq = dot(&out.normal, &out.normal);
        for _ in 0..10_000 {
            let mut x: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let shift = rng.gen_range(-1.0..1.0) - out.residual(&x);
            x.iter_mut().zip(&out.normal).for_each(|(xi, pi)| *xi += shift * pi / qq);
            let (y, w) = strip_image_witness(&s, &a, &g, gamma, &x);
            let back: Vec<f64> = a.mul_vec(&y).iter().zip(g.mul_vec(&w)).map(|(ay, gi)| ay + gamma * gi).collect();
            let exact = back.iter().zip(&x).all(|(b, xi)| (b - xi).abs() <= 1e-9 * (1.0 + xi.abs()));
            unreachable += usize::from(!(s.contains(&y, 1e-9) && w.iter().all(|v| v.abs() <= 1.0 + 1e-9) && exact));
        }
    }
    report(
        5,
        "strip image equality",
        outside == 0 && unreachable == 0,
        t.elapsed(),
        &format!("{outside} forward and {unreachable} backward violations over 50 x 2 x 10^4 samples"),
    );
}

struct Campaigns {
    fast: CampaignResult,
    fast_time: Duration,
    slow: CampaignResult,
    slow_time: Duration,
}

/// Oscillator campaign, split so the parallelotope and zonotope
/// configurations can be timed on their own.
fn oscillator() -> &'static Campaigns {
    static CELL: OnceLock<Campaigns> = OnceLock::new();
    CELL.get_or_init(|| {
        let base = Scenario::double_oscillator();
        let (fast_kinds, slow_kinds): (Vec<_>, Vec<_>) = base
            .estimators
            .iter()
            .partition(|k| !matches!(k, EstimatorKind::Constrained { .. }));
        let mut fast = base.clone();
        fast.estimators = fast_kinds;
        let mut slow = base;
        slow.estimators = slow_kinds;
        let t = Instant::now();
        let fast_res = run_campaign(&fast, None).expect("par/zon campaign");
        let fast_time = t.elapsed();
        let t = Instant::now();
        let slow_res = run_campaign(&slow, None).expect("cz campaign");
        Campaigns {
            fast: fast_res,
            fast_time,
            slow: slow_res,
            slow_time: t.elapsed(),
        }
    })
}

fn all_cells(c: &Campaigns) -> impl Iterator<Item = (&CampaignResult, &String)> {
    [&c.fast, &c.slow].into_iter().flat_map(|r| r.estimators.iter().map(move |e| (r, e)))
}

#[test]
fn criterion_06_soundness() {
    let t = Instant::now();
    // Episodes fail with a containment error on the first violation, so a
    // completed campaign means zero violations.
    let c = oscillator();
    let osc_episodes = c.fast.episodes.len() + c.slow.episodes.len();
    let mut random = Scenario::random_systems();
    random.runs = 20;
    let res = run_campaign(&random, None);
    let ok = res.is_ok();
    let detail = match &res {
        Ok(r) => format!(
            "{osc_episodes} oscillator episodes and {} random-system episodes without a containment violation",
            r.episodes.len()
        ),
        Err(e) => format!("random systems: {e}"),
    };
    report(6, "soundness", ok, t.elapsed(), &detail);
}

#[test]
fn criterion_07_table_scale() {
    let c = oscillator();
    let par_a = c.fast.mean_uncertainty("par", Mode::Adaptive, 5).unwrap();
    let par_f = c.fast.mean_uncertainty("par", Mode::Fixed, 5).unwrap();
    let mut ok = (0.53..=0.99).contains(&par_a) && (2.7..=6.4).contains(&par_f);
    let mut ratios = Vec::new();
    for (r, e) in all_cells(c) {
        let ratio = r.mean_uncertainty(e, Mode::Fixed, 5).unwrap() / r.mean_uncertainty(e, Mode::Adaptive, 5).unwrap();
        ok &= ratio >= 3.0;
        ratios.push(format!("{e} {ratio:.2}"));
    }
    ok &= c.fast_time < Duration::from_secs(600);
    report(
        7,
        "table scale",
        ok,
        c.fast_time + c.slow_time,
        &format!(
            "par d=5 adaptive {par_a:.3}, fixed {par_f:.3}; fixed/adaptive at d=5: {}; par/zon campaign {:.0}s, cz campaign {:.0}s",
            ratios.join(", "),
            c.fast_time.as_secs_f64(),
            c.slow_time.as_secs_f64()
        ),
    );
}

#[test]
fn criterion_08_trends() {
    let c = oscillator();
    let mut ok = true;
    let mut notes = Vec::new();
    for (r, e) in all_cells(c) {
        let u = |mode, d| r.mean_uncertainty(e, mode, d).unwrap();
        let ds = &r.d_values;
        let monotone = ds.windows(2).all(|w| u(Mode::Adaptive, w[1]) <= 1.1 * u(Mode::Adaptive, w[0]));
        let gain_a = 1.0 - u(Mode::Adaptive, 20) / u(Mode::Adaptive, 10);
        let gain_f = 1.0 - u(Mode::Fixed, 20) / u(Mode::Fixed, 10);
        let cell_ok = monotone && gain_a < 0.15 && gain_f > 0.25;
        ok &= cell_ok;
        notes.push(format!(
            "{e}: monotone {monotone}, 10->20 adaptive {:.0}% fixed {:.0}%",
            100.0 * gain_a,
            100.0 * gain_f
        ));
    }
    report(8, "trends", ok, Duration::ZERO, &notes.join("; "));
}

#[test]
fn criterion_09_geometry_oracles() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(9);

    let mut worst_vol: f64 = 0.0;
    for _ in 0..20 {
        let m = rng.gen_range(3..=6);
        let z = Zonotope::new(vec![0.0; 3], random_matrix(&mut rng, 3, m)).unwrap();
        let facets = zonotope_facets(&z);
        let hull = z.interval_hull();
        let box_vol: f64 = hull.iter().map(Interval::width).product();
        let samples = 1_000_000;
        let mut inside = 0usize;
        for _ in 0..samples {
            let x: Vec<f64> = hull.iter().map(|iv| rng.gen_range(iv.lo..iv.hi)).collect();
            inside += usize::from(in_facets(&facets, &z.center, &x));
        }
        let mc = box_vol * inside as f64 / samples as f64;
        worst_vol = worst_vol.max((z.volume() - mc).abs() / mc);
    }

    let mut worst_width: f64 = 0.0;
    for _ in 0..50 {
        let n = rng.gen_range(1..=4);
        let m = rng.gen_range(1..=6);
        let center: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let z = Zonotope::new(center, random_matrix(&mut rng, n, m)).unwrap();
        let cz = ConstrainedZonotope::from_zonotope(&z);
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let (a, b) = (z.width_along(&v).unwrap(), cz.width_along(&v).unwrap());
        worst_width = worst_width.max((a.lo - b.lo).abs()).max((a.hi - b.hi).abs());
    }

    let mut lp_mismatch = 0;
    let mut lp_cases = 0;
    for _ in 0..300 {
        let n = rng.gen_range(1..=3);
        let k = rng.gen_range(0..n);
        let obj: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let lower: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..0.0)).collect();
        let upper: Vec<f64> = lower.iter().map(|l| l + rng.gen_range(0.1..3.0)).collect();
        let eq = random_matrix(&mut rng, k, n);
        let rhs: Vec<f64> = if rng.gen_bool(0.7) {
            let x: Vec<f64> = lower.iter().zip(&upper).map(|(l, u)| rng.gen_range(*l..*u)).collect();
            eq.mul_vec(&x)
        } else {
            (0..k).map(|_| rng.gen_range(-5.0..5.0)).collect()
        };
        let lp = LinearProgram::new(obj, eq, rhs, lower, upper).unwrap();
        for dir in [Direction::Maximize, Direction::Minimize] {
            lp_cases += 1;
            let agree = match (lp.solve(dir), lp_by_vertices(&lp, dir)) {
                (Ok(s), Some(v)) => (s.value - v).abs() <= 1e-9 * (1.0 + v.abs()),
                (Err(quantsm::Error::Infeasible), None) => true,
                _ => false,
            };
            lp_mismatch += usize::from(!agree);
        }
    }

    report(
        9,
        "geometry oracles",
        worst_vol < 0.05 && worst_width < 1e-9 && lp_mismatch == 0 && t.elapsed() < Duration::from_secs(120),
        t.elapsed(),
        &format!(
            "volume vs Monte Carlo max rel. error {:.2}%, empty-constraint width error {worst_width:.1e}, LP mismatches {lp_mismatch}/{lp_cases}",
            100.0 * worst_vol
        ),
    );
}

#[test]
fn criterion_10_equal_radius() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst: f64 = 0.0;
    for _ in 0..500 {
        let lo = rng.gen_range(-10.0..10.0);
        let dv = rng.gen_range(0.0..2.0);
        let hi = lo + 2.0 * dv + rng.gen_range(1e-3..20.0);
        let d = rng.gen_range(1..=40);
        let q = quantsm::quantizer::adapt_from_support(lo, hi, dv, d).unwrap();
        let expect = (hi - lo - 2.0 * dv) / (d as f64 + 1.0) + 2.0 * dv;
        let range = Interval::new(lo, hi).unwrap();
        for y in 0..=d {
            let ms = measurement_set(y, &q, dv, &[1.0], Some(range)).unwrap();
            let len = 2.0 / ms.as_strip().unwrap().normal[0];
            worst = worst.max((len - expect).abs());
        }
    }
    report(
        10,
        "equal radius",
        worst < 1e-12,
        t.elapsed(),
        &format!("max deviation {worst:.2e} over 500 tuples"),
    );
}
