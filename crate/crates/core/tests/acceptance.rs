//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.
//!
//! `SLOPE_LAB_ACCEPT_REPS` lowers the simulation size for desk-scale runs;
//! below 100000 replicates the coverage tolerances widen to 1 pp and the KL
//! tolerance to 0.01.

mod common;

use std::time::Instant;

use common::{brute_force_cauchy_max, clopper_pearson};
use slope_lab::families::{cauchy_loglik, logit, Chart, Family, Sample};
use slope_lab::gcore::*;
use slope_lab::intervals::*;
use slope_lab::mc::*;
use slope_lab::rng::stream_rng;

type Check = std::result::Result<String, String>;

fn ensure(ok: bool, msg: String) -> Check {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn count(y: &Sample) -> f64 {
    y.as_count().unwrap() as f64
}

// n, Lambda(median), Lambda(median score), Eff(median), Eff(median score), n(median), n(median score)
const TABLE1: [(u32, f64, f64, f64, f64, f64, f64); 16] = [
    (1, 0.0, 0.50000, 0.0, 100.0, 0.0, 1.0),
    (3, 0.0, 1.09064, 0.0, 72.71, 0.0, 2.2),
    (5, 0.81883, 1.74552, 32.75, 69.82, 1.6, 3.5),
    (7, 1.63377, 2.44042, 46.68, 69.73, 3.3, 4.9),
    (9, 2.44703, 3.16164, 54.38, 70.26, 4.9, 6.3),
    (11, 3.25942, 3.90109, 59.26, 70.93, 6.5, 7.8),
    (13, 4.07130, 4.65369, 62.64, 71.60, 8.1, 9.3),
    (15, 4.88286, 5.41608, 65.10, 72.21, 9.8, 10.8),
    (17, 5.69418, 6.18596, 66.99, 72.78, 11.4, 12.4),
    (19, 6.50538, 6.96171, 68.48, 73.28, 13.0, 13.9),
    (21, 7.31647, 7.74214, 69.68, 73.73, 14.6, 15.5),
    (23, 8.12744, 8.52636, 70.67, 74.14, 16.3, 17.1),
    (25, 8.93839, 9.31370, 71.51, 74.51, 17.9, 18.6),
    (27, 9.74925, 10.10363, 72.22, 74.84, 19.5, 20.2),
    (29, 10.56011, 10.89574, 72.83, 75.14, 21.1, 21.8),
    (31, 11.37087, 11.68970, 73.36, 75.42, 22.7, 23.4),
];

fn table1() -> Check {
    let start = Instant::now();
    let rows = cauchy_table(31).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    let (mut d_lambda, mut d_eff) = (0.0f64, 0.0f64);
    let mut exact_score = true;
    for (r, t) in rows.iter().zip(TABLE1) {
        if r.n != t.0 {
            return Err(format!("row order mismatch at n={}", r.n));
        }
        d_lambda = d_lambda
            .max((r.lambda_median - t.1).abs())
            .max((r.lambda_median_score - t.2).abs());
        exact_score &= r.lambda_score == r.n as f64 / 2.0;
        d_eff = d_eff
            .max((r.eff_median_pct - t.3).abs())
            .max((r.eff_median_score_pct - t.4).abs())
            .max((r.n_median - t.5).abs())
            .max((r.n_median_score - t.6).abs());
    }
    let diverged = rows[0].median_variance_diverges && rows[1].median_variance_diverges;
    ensure(
        rows.len() == 16 && d_lambda <= 1e-3 && d_eff <= 0.05 && exact_score && diverged && secs < 60.0,
        format!("16 rows, max |dLambda| {d_lambda:.2e}, max |dEff|,|dn| {d_eff:.3}, n=1,3 diverge {diverged}, {secs:.1}s"),
    )
}

struct Tolerances {
    pp: f64,
    kl: f64,
}

fn tolerances(reps: usize) -> Tolerances {
    if reps >= 100_000 {
        Tolerances { pp: 0.003, kl: 0.005 }
    } else {
        Tolerances { pp: 0.010, kl: 0.010 }
    }
}

fn coverage(raw: &SimSummary, adjusted: &SimSummary, secs: f64) -> Check {
    let tol = tolerances(raw.config.reps);
    let targets = [
        (SimMethod::WaldExpected, 0.075, 0.141),
        (SimMethod::WaldObserved, 0.069, 0.140),
        (SimMethod::Lrt, 0.056, 0.135),
    ];
    let (mut raw_ok, mut adj_ok, mut kl_ok) = (true, true, true);
    let mut msg = Vec::new();
    for (m, raw_target, kl_target) in targets {
        let r = raw.method(m).unwrap();
        let a = adjusted.method(m).unwrap();
        raw_ok &= (r.coverage_error - raw_target).abs() <= tol.pp + 3.0 * r.se;
        adj_ok &= (a.coverage_error - 0.05).abs() <= tol.pp + 3.0 * a.se;
        kl_ok &= (a.mean_kl_length - kl_target).abs() <= tol.kl;
        msg.push(format!(
            "{} raw {:.2}% adj {:.2}% kl {:.4}",
            m.short(),
            100.0 * r.coverage_error,
            100.0 * a.coverage_error,
            a.mean_kl_length
        ));
    }
    let fast = secs < 600.0;
    let verdict = |b: bool| if b { "ok" } else { "FAIL" };
    ensure(
        raw_ok && adj_ok && kl_ok && fast,
        format!(
            "reps {}: {}; raw {}, adjusted at 5% {}, kl {}, runtime {} ({secs:.0}s for both runs, {} failed replicates)",
            raw.config.reps,
            msg.join(", "),
            verdict(raw_ok),
            verdict(adj_ok),
            verdict(kl_ok),
            verdict(fast),
            raw.failures + adjusted.failures
        ),
    )
}

fn fig4(raw: &SimSummary) -> Check {
    let bins = bin_by_obs_info(raw, 20).map_err(|e| e.to_string())?;
    let (bottom, _) = bins[0].error(SimMethod::WaldExpected).unwrap();
    let (top, _) = bins[19].error(SimMethod::WaldExpected).unwrap();
    let se_b = bins[0].error(SimMethod::WaldExpected).unwrap().1;
    let se_t = bins[19].error(SimMethod::WaldExpected).unwrap().1;
    let lrt: Vec<f64> = bins.iter().map(|b| b.error(SimMethod::Lrt).unwrap().0).collect();
    let lrt_dev = lrt.iter().map(|e| (e - 0.05).abs()).fold(0.0, f64::max);
    ensure(
        bottom > 0.05 + 3.0 * se_b && top < 0.05 - 3.0 * se_t && lrt_dev <= 0.02,
        format!(
            "wald_expected bottom {:.2}% top {:.2}%, lrt max |err - 5%| {:.2} pp",
            100.0 * bottom,
            100.0 * top,
            100.0 * lrt_dev
        ),
    )
}

fn bernoulli_exactness() -> Check {
    let f = Family::bernoulli(10).map_err(|e| e.to_string())?;
    let grid = interior_grid(97);
    let rows = bernoulli_efficiency_curves(10, &grid).map_err(|e| e.to_string())?;
    let d_y = rows.iter().map(|r| (r.eff_y - 1.0).abs()).fold(0.0, f64::max);
    let low: Vec<f64> = (1..=150).map(|i| i as f64 / 1000.0).chain(grid.iter().copied().filter(|p| *p <= 0.15)).collect();
    let low_rows = bernoulli_efficiency_curves(10, &low).map_err(|e| e.to_string())?;
    let max_low = low_rows.iter().map(|r| r.eff_y_y1).fold(0.0, f64::max);
    let a = lift_point_estimator(&f, "y(y-1)", |y| count(y) * (count(y) - 1.0)).map_err(|e| e.to_string())?;
    let b = lift_point_estimator(&f, "-(n-y)(n-y-1)", |y| -(10.0 - count(y)) * (9.0 - count(y))).map_err(|e| e.to_string())?;
    let ra = score_correlation2(&a, 0.1).map_err(|e| e.to_string())?;
    let rb = score_correlation2(&b, 0.1).map_err(|e| e.to_string())?;
    let prop = lift_point_estimator(&f, "y/n", |y| count(y) / 10.0).map_err(|e| e.to_string())?;
    let mut d_cr = 0.0f64;
    for &p in &grid {
        let v = prop.moments(p).map_err(|e| e.to_string())?.variance;
        let inv_info = 1.0 / f.fisher_info(p).map_err(|e| e.to_string())?;
        d_cr = d_cr.max((v - inv_info).abs() / inv_info);
    }
    ensure(
        d_y <= 1e-12 && max_low <= 0.8 && (ra - rb).abs() > 1e-3 && d_cr <= 1e-13,
        format!(
            "max |Eff(y) - 1| {d_y:.1e}, max Eff(y(y-1)) on p <= 0.15 {max_low:.4}, rho2 at p=0.1 {ra:.4} vs swapped {rb:.4}, V(y/n) vs 1/I rel {d_cr:.1e}"
        ),
    )
}

fn identity_battery() -> Check {
    let mut worst = 0.0f64;
    let mut checked = 0;
    let p = Family::bernoulli(10).map_err(|e| e.to_string())?;
    let mut battery: Vec<GenEstimator> = vec![score_estimator(&p)];
    battery.extend(bernoulli_statistics(10).map_err(|e| e.to_string())?);
    battery.push(score_estimator(&p.with_chart(Chart::LogOdds).map_err(|e| e.to_string())?));
    battery.push(score_estimator(&Family::normal_location(1.0, 5).map_err(|e| e.to_string())?));
    battery.push(score_estimator(&Family::cauchy_location(15).map_err(|e| e.to_string())?));
    let med = Family::cauchy_median(7);
    battery.push(score_estimator(&med));
    battery.push(median_lift(&med).map_err(|e| e.to_string())?);
    for g in &battery {
        for t in default_grid(g.family()) {
            worst = worst.max(check_identity(g, t).map_err(|e| format!("{g:?} at {t}: {e}"))?);
            checked += 1;
        }
    }
    ensure(worst < 1e-6, format!("{checked} (estimator, theta) pairs, max residual {worst:.2e}"))
}

fn invariance_battery() -> Check {
    let p = Family::bernoulli(10).map_err(|e| e.to_string())?;
    let t = p.with_chart(Chart::LogOdds).map_err(|e| e.to_string())?;
    let mut d_chart = 0.0f64;
    for (gp, gt) in bernoulli_statistics(10)
        .map_err(|e| e.to_string())?
        .into_iter()
        .zip([
            lift_point_estimator(&t, "y", count),
            lift_point_estimator(&t, "y(y-1)", |y| count(y) * (count(y) - 1.0)),
            lift_point_estimator(&t, "y^2", |y| count(y).powi(2)),
        ])
    {
        let gt = gt.map_err(|e| e.to_string())?;
        for p0 in interior_grid(19) {
            let a = lambda_efficiency(&gp, p0).map_err(|e| e.to_string())?;
            let b = lambda_efficiency(&gt, logit(p0)).map_err(|e| e.to_string())?;
            d_chart = d_chart.max((a - b).abs());
        }
    }
    let (sp, st) = (score_estimator(&p), score_estimator(&t));
    for p0 in interior_grid(19) {
        for y in 0..=10 {
            let s = Sample::Count(y);
            let a = standardize(&sp, p0, &s).map_err(|e| e.to_string())?;
            let b = standardize(&st, logit(p0), &s).map_err(|e| e.to_string())?;
            d_chart = d_chart.max((a - b).abs());
        }
    }
    let mut d_class = 0.0f64;
    for g in bernoulli_statistics(10).map_err(|e| e.to_string())? {
        let k = g.rescaled("k g", |th: f64| 2.0 + th.sin());
        for p0 in interior_grid(9) {
            let a = squared_slope(&g, p0).map_err(|e| e.to_string())?;
            let b = squared_slope(&k, p0).map_err(|e| e.to_string())?;
            d_class = d_class.max((a - b).abs() / a.max(1.0));
        }
    }
    let u = lift_point_estimator(&p, "y^2", |y| count(y).powi(2)).map_err(|e| e.to_string())?;
    let w = lift_point_estimator(&p, "3y^2-7", |y| 3.0 * count(y).powi(2) - 7.0).map_err(|e| e.to_string())?;
    let mut d_affine = 0.0f64;
    for p0 in interior_grid(19) {
        let a = squared_slope(&u, p0).map_err(|e| e.to_string())?;
        let b = squared_slope(&w, p0).map_err(|e| e.to_string())?;
        d_affine = d_affine.max((a - b).abs() / a.max(1.0));
    }
    let demo = two_submanifold_demo(Axis::First, 10, 0.0).map_err(|e| e.to_string())?;
    let sub_ok = demo.x1.lambda == 10.0 && demo.x2.lambda == 0.0;
    ensure(
        d_chart <= 1e-8 && d_class <= 1e-8 && d_affine <= 1e-8 && sub_ok,
        format!(
            "chart {d_chart:.1e}, k(theta) g {d_class:.1e}, 3u-7 {d_affine:.1e}, submanifold Lambda(x1)={} Lambda(x2)={}",
            demo.x1.lambda, demo.x2.lambda
        ),
    )
}

fn interval_equalities() -> Check {
    let f = Family::normal_location(1.0, 4).map_err(|e| e.to_string())?;
    let mut d_norm = 0.0f64;
    for xbar in [-3.0, -0.2, 0.0, 1.7] {
        for z in [0.5, 1.0, 1.96, 2.576] {
            let y = Sample::Mean(xbar);
            let s = score_interval(&f, &y, z).map_err(|e| e.to_string())?;
            let l = lrt_interval(&lrt_estimate(&f, &y).map_err(|e| e.to_string())?, z).map_err(|e| e.to_string())?;
            d_norm = d_norm.max((s.lo - l.lo).abs()).max((s.hi - l.hi).abs());
        }
    }
    let mut d_cp = 0.0f64;
    for y in 0..=10 {
        let iv = exact_bernoulli_interval(10, y, 0.05).map_err(|e| e.to_string())?;
        let (lo, hi) = clopper_pearson(10, y, 0.05);
        d_cp = d_cp.max((iv.lo - lo).abs()).max((iv.hi - hi).abs());
    }
    ensure(
        d_norm <= 1e-10 && d_cp <= 1e-8,
        format!("normal score vs LRT {d_norm:.1e}, exact vs Clopper-Pearson {d_cp:.1e}"),
    )
}

fn mle_oracle() -> Check {
    let f = Family::cauchy_location(15).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for seed in 0..1000u64 {
        let y = f.sample_from(0.0, &mut stream_rng(0xacce_0000 + seed, 0)).map_err(|e| e.to_string())?;
        let Sample::Values(x) = &y else { unreachable!() };
        let t = cauchy_mle(x).map_err(|e| e.to_string())?;
        let (_, best) = brute_force_cauchy_max(x);
        worst = worst.max((cauchy_loglik(x, t) - best).abs());
    }
    ensure(worst < 1e-8, format!("1000 samples, max |l(solver) - l(grid)| {worst:.2e}"))
}

fn qq(raw: &SimSummary) -> Check {
    let signed = qq_from(raw, QqStatistic::SignedRootLrt).map_err(|e| e.to_string())?;
    let median = qq_from(raw, QqStatistic::MedianStandardized).map_err(|e| e.to_string())?;
    let (a, b) = (max_quantile_gap(&signed, 0.99), max_quantile_gap(&median, 0.99));
    ensure(a < b, format!("central 99% max gap: signed root {a:.4}, median {b:.4}"))
}

fn main() {
    let reps = std::env::var("SLOPE_LAB_ACCEPT_REPS")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(100_000);
    let mut failed = 0;
    let mut report = |name: &str, c: Check, secs: f64| {
        let (tag, msg) = match c {
            Ok(m) => ("PASS", m),
            Err(m) => {
                failed += 1;
                ("FAIL", m)
            }
        };
        println!("[{tag}] {name}: {msg} ({secs:.1}s)");
    };
    let timed = |f: &dyn Fn() -> Check| {
        let s = Instant::now();
        let c = f();
        (c, s.elapsed().as_secs_f64())
    };

    let (c, s) = timed(&table1);
    report("table1_reproduction", c, s);

    let start = Instant::now();
    let raw_cfg = SimConfig {
        reps,
        adjustments: Adjustments::raw(),
        ..SimConfig::default()
    };
    let sims = run_coverage(&raw_cfg).and_then(|raw| {
        let adj = run_coverage(&SimConfig {
            adjustments: Adjustments::default(),
            ..raw_cfg.clone()
        })?;
        Ok((raw, adj))
    });
    let sim_secs = start.elapsed().as_secs_f64();
    match &sims {
        Ok((raw, adj)) => {
            report("cauchy_coverage", coverage(raw, adj, sim_secs), sim_secs);
            let (c, s) = timed(&|| fig4(raw));
            report("fig4_obs_info_bins", c, s);
        }
        Err(e) => {
            report("cauchy_coverage", Err(e.to_string()), sim_secs);
            report("fig4_obs_info_bins", Err(e.to_string()), 0.0);
        }
    }
    let (c, s) = timed(&bernoulli_exactness);
    report("bernoulli_exactness", c, s);
    let (c, s) = timed(&identity_battery);
    report("identity_battery", c, s);
    let (c, s) = timed(&invariance_battery);
    report("invariance_battery", c, s);
    let (c, s) = timed(&interval_equalities);
    report("interval_equalities", c, s);
    let (c, s) = timed(&mle_oracle);
    report("cauchy_mle_oracle", c, s);
    match &sims {
        Ok((raw, _)) => {
            let (c, s) = timed(&|| qq(raw));
            report("qq_signed_root_vs_median", c, s);
        }
        Err(e) => report("qq_signed_root_vs_median", Err(e.to_string()), 0.0),
    }

    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
