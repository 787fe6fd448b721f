use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, ValueEnum};
use serde::Serialize;
use slope_lab::families::{logit, Chart, Family, Sample};
use slope_lab::gcore::{
    bernoulli_efficiency_curves, bernoulli_statistics, cauchy_table_row, check_identity, grid,
    interior_grid, lambda_efficiency, lift_point_estimator, median_lift, score_correlation2,
    score_estimator, squared_slope, standardize, two_submanifold_demo, Axis, EstimatorKind,
    GenEstimator,
};
use slope_lab::mc::{
    bin_by_obs_info, qq_from, run_coverage, Adjustments, QqStatistic, SimConfig, SimMethod, DEFAULT_SEED,
};

use crate::error::{CliError, CliResult, Context};
use crate::output::{flag, manifest_path, opt_real, real, RunManifest, Table};

fn flags_json<T: Serialize>(args: &T) -> serde_json::Value {
    serde_json::to_value(args).expect("flags serialize")
}

#[derive(Debug, Args, Serialize)]
pub struct Table1Args {
    /// Largest (odd) sample size.
    #[arg(long, default_value_t = 31)]
    pub n_max: u32,
    #[arg(long, default_value = "table1.csv")]
    pub out: PathBuf,
}

pub fn table1(a: &Table1Args) -> CliResult<()> {
    let started = Instant::now();
    if a.n_max == 0 || a.n_max % 2 == 0 {
        return Err(CliError::Usage(format!("--n-max must be odd, got {}", a.n_max)));
    }
    let mut t = Table::create(
        &a.out,
        "table1",
        &[
            "n",
            "lambda_median",
            "lambda_median_score",
            "lambda_score",
            "eff_median_pct",
            "eff_median_score_pct",
            "n_median",
            "n_median_score",
            "median_variance_diverges",
        ],
    )?;
    for n in (1..=a.n_max).step_by(2) {
        let r = cauchy_table_row(n).context(|| format!("table row n={n}"))?;
        t.row([
            n.to_string(),
            real(r.lambda_median),
            real(r.lambda_median_score),
            real(r.lambda_score),
            real(r.eff_median_pct),
            real(r.eff_median_score_pct),
            real(r.n_median),
            real(r.n_median_score),
            flag(r.median_variance_diverges),
        ])?;
    }
    let out = t.finish()?;
    RunManifest::write(&manifest_path(&out), "table1", flags_json(a), None, &[out], started)
}

#[derive(Debug, Args, Serialize)]
pub struct BernoulliEffArgs {
    /// Number of trials.
    #[arg(long, default_value_t = 10)]
    pub n: u32,
    /// Interior grid points in (0, 1).
    #[arg(long, default_value_t = 97)]
    pub grid: usize,
    #[arg(long, default_value = "bernoulli_eff.csv")]
    pub out: PathBuf,
}

pub fn bernoulli_eff(a: &BernoulliEffArgs) -> CliResult<()> {
    let started = Instant::now();
    if a.grid == 0 {
        return Err(CliError::Usage("--grid must be at least 1".into()));
    }
    let rows = bernoulli_efficiency_curves(a.n, &interior_grid(a.grid)).context(|| "efficiency curves".into())?;
    let mut t = Table::create(&a.out, "bernoulli-eff", &["p", "eff_y", "eff_y_y1", "eff_y2"])?;
    for r in rows {
        t.row([real(r.p), real(r.eff_y), real(r.eff_y_y1), real(r.eff_y2)])?;
    }
    let out = t.finish()?;
    RunManifest::write(&manifest_path(&out), "bernoulli-eff", flags_json(a), None, &[out], started)
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParamChart {
    P,
    LogOdds,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyName {
    Bernoulli,
    Normal,
    Cauchy,
    Median,
}

#[derive(Debug, Args, Serialize)]
pub struct CurvesArgs {
    #[arg(long, value_enum, default_value = "bernoulli")]
    pub family: FamilyName,
    #[arg(long, value_enum, default_value = "p")]
    pub param_chart: ParamChart,
    #[arg(long, default_value_t = 10)]
    pub n: u32,
    #[arg(long, default_value_t = 97)]
    pub grid: usize,
    #[arg(long, default_value = "curves.csv")]
    pub out: PathBuf,
}

/// Standardized score curves, one column per outcome `y = 0..n`.
pub fn curves(a: &CurvesArgs) -> CliResult<()> {
    let started = Instant::now();
    if a.family != FamilyName::Bernoulli {
        return Err(CliError::Usage(
            "curves supports only --family bernoulli (the other families have continuous outcomes)".into(),
        ));
    }
    if a.grid < 2 {
        return Err(CliError::Usage("--grid must be at least 2".into()));
    }
    let base = Family::bernoulli(a.n).context(|| "family".into())?;
    let (fam, thetas) = match a.param_chart {
        ParamChart::P => (base, interior_grid(a.grid)),
        ParamChart::LogOdds => {
            let f = base.with_chart(Chart::LogOdds).context(|| "chart".into())?;
            let g = (0..a.grid)
                .map(|i| -4.0 + 8.0 * i as f64 / (a.grid - 1) as f64)
                .collect();
            (f, g)
        }
    };
    let s = score_estimator(&fam);
    let mut header = vec!["theta".to_string()];
    header.extend((0..=a.n).map(|y| format!("y{y}")));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut t = Table::create(&a.out, "curves", &header)?;
    for th in thetas {
        let mut row = vec![real(th)];
        for y in 0..=a.n {
            let v = standardize(&s, th, &Sample::Count(y)).context(|| format!("curve y={y} at {th}"))?;
            row.push(real(v));
        }
        t.row(row)?;
    }
    let out = t.finish()?;
    RunManifest::write(&manifest_path(&out), "curves", flags_json(a), None, &[out], started)
}

#[derive(Debug, Args, Serialize)]
pub struct CauchySimArgs {
    #[arg(long, default_value_t = 15)]
    pub n: u32,
    #[arg(long, default_value_t = 100_000)]
    pub reps: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Nominal intervals, no margin adjustment.
    #[arg(long, overrides_with = "adjusted")]
    pub raw: bool,
    /// Margins adjusted to equalize coverage errors (the default).
    #[arg(long, overrides_with = "raw")]
    pub adjusted: bool,
    /// Observed-information bins.
    #[arg(long, default_value_t = 20)]
    pub bins: usize,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub theta_true: f64,
    /// Worker threads (default: SLOPE_LAB_THREADS, then all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long, default_value = "cauchy_sim")]
    pub out_prefix: String,
}

pub fn cauchy_sim(a: &CauchySimArgs) -> CliResult<()> {
    let started = Instant::now();
    let cfg = SimConfig {
        n: a.n,
        reps: a.reps,
        theta_true: a.theta_true,
        seed: a.seed,
        alpha: a.alpha,
        adjustments: if a.raw { Adjustments::raw() } else { Adjustments::default() },
        methods: SimMethod::ALL.to_vec(),
        threads: a.threads,
    };
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    if a.bins == 0 || a.bins > a.reps {
        return Err(CliError::Usage(format!("--bins must lie in 1..={}", a.reps)));
    }
    let s = run_coverage(&cfg).context(|| "coverage simulation".into())?;
    let path = |suffix: &str| PathBuf::from(format!("{}_{suffix}", a.out_prefix));
    let mut outputs = Vec::new();

    let mut t = Table::create(
        &path("summary.csv"),
        "cauchy-sim-summary",
        &["method", "adjustment", "z", "coverage_error", "se", "mean_kl_length", "mean_width", "failures"],
    )?;
    for m in &s.methods {
        t.row([
            m.method.short().to_string(),
            real(m.adjustment),
            real(s.z),
            real(m.coverage_error),
            real(m.se),
            real(m.mean_kl_length),
            real(m.mean_width),
            s.failures.to_string(),
        ])?;
    }
    outputs.push(t.finish()?);

    let bins = bin_by_obs_info(&s, a.bins).context(|| "observed-information bins".into())?;
    let mut header = vec!["bin", "i_obs_lo", "i_obs_hi", "count"];
    for m in SimMethod::ALL {
        header.push(match m {
            SimMethod::WaldExpected => "err_we",
            SimMethod::WaldObserved => "err_wo",
            SimMethod::Lrt => "err_lrt",
        });
        header.push(match m {
            SimMethod::WaldExpected => "se_we",
            SimMethod::WaldObserved => "se_wo",
            SimMethod::Lrt => "se_lrt",
        });
    }
    let mut t = Table::create(&path("bins.csv"), "cauchy-sim-bins", &header)?;
    for b in &bins {
        let mut row = vec![b.bin.to_string(), real(b.i_obs_lo), real(b.i_obs_hi), b.count.to_string()];
        for m in SimMethod::ALL {
            let e = b.error(m);
            row.push(opt_real(e.map(|e| e.0)));
            row.push(opt_real(e.map(|e| e.1)));
        }
        t.row(row)?;
    }
    outputs.push(t.finish()?);

    let mut t = Table::create(&path("qq.csv"), "cauchy-sim-qq", &["statistic", "normal_quantile", "empirical"])?;
    for stat in QqStatistic::ALL {
        let pairs = match qq_from(&s, stat) {
            Ok(p) => p,
            // no finite median variance for even n or n < 5
            Err(_) if stat == QqStatistic::MedianStandardized => continue,
            Err(e) => return Err(e).context(|| format!("qq {}", stat.name())),
        };
        for (q, e) in pairs {
            t.row([stat.name().to_string(), real(q), real(e)])?;
        }
    }
    outputs.push(t.finish()?);

    let mut t = Table::create(
        &path("replicates.csv"),
        "cauchy-sim-replicates",
        &["rep", "theta_hat", "i_obs", "hit_we", "hit_wo", "hit_lrt", "kl_we", "kl_wo", "kl_lrt"],
    )?;
    for r in &s.replicates {
        let mut row = vec![r.rep.to_string(), real(r.theta_hat), real(r.i_obs)];
        let outs: Vec<_> = SimMethod::ALL.iter().map(|m| r.outcome(*m)).collect();
        row.extend(outs.iter().map(|o| o.map(|o| flag(o.hit)).unwrap_or_default()));
        row.extend(outs.iter().map(|o| opt_real(o.map(|o| o.kl_length))));
        t.row(row)?;
    }
    outputs.push(t.finish()?);

    for m in &s.methods {
        println!(
            "{:<14} adjustment {:.5}  coverage error {:.4} (se {:.4})  mean KL length {:.4}",
            m.method.name(),
            m.adjustment,
            m.coverage_error,
            m.se,
            m.mean_kl_length
        );
    }
    RunManifest::write(
        &path("manifest.json"),
        "cauchy-sim",
        flags_json(a),
        Some(a.seed),
        &outputs,
        started,
    )
}

#[derive(Debug, Args, Serialize)]
pub struct CheckArgs {
    #[arg(long, value_enum, default_value = "bernoulli")]
    pub family: FamilyName,
    /// Parameter grid points.
    #[arg(long, default_value_t = 41)]
    pub grid: usize,
    /// Sample size (trials for bernoulli, draws otherwise).
    #[arg(long, default_value_t = 10)]
    pub n: u32,
    /// Known scale of the normal family.
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Median law of 2k+1 draws.
    #[arg(long, default_value_t = 7)]
    pub k: u32,
    #[arg(long, default_value = "check.csv")]
    pub out: PathBuf,
}

struct Finding {
    property: &'static str,
    estimator: String,
    theta: f64,
    value: f64,
    tolerance: f64,
}

impl Finding {
    fn pass(&self) -> bool {
        self.value <= self.tolerance
    }
}

fn count(y: &Sample) -> f64 {
    y.as_count().unwrap_or(0) as f64
}

fn label(g: &GenEstimator) -> String {
    match g.kind() {
        EstimatorKind::Score => "score".into(),
        EstimatorKind::LiftedPoint { label } | EstimatorKind::Custom { label } => label.clone(),
    }
}

fn battery(a: &CheckArgs) -> CliResult<(Family, Vec<GenEstimator>)> {
    let ctx = || "family".to_string();
    Ok(match a.family {
        FamilyName::Bernoulli => {
            let f = Family::bernoulli(a.n).context(ctx)?;
            let mut v = vec![score_estimator(&f)];
            v.extend(bernoulli_statistics(a.n).context(ctx)?);
            (f, v)
        }
        FamilyName::Normal => {
            let f = Family::normal_location(a.sigma, a.n).context(ctx)?;
            let cube = lift_point_estimator(&f, "xbar^3", |y| y.as_real().unwrap_or(f64::NAN).powi(3)).context(ctx)?;
            (f, vec![score_estimator(&f), cube])
        }
        FamilyName::Cauchy => {
            let f = Family::cauchy_location(a.n).context(ctx)?;
            (f, vec![score_estimator(&f)])
        }
        FamilyName::Median => {
            let f = Family::cauchy_median(a.k);
            let mut v = vec![score_estimator(&f)];
            if a.k >= 2 {
                v.push(median_lift(&f).context(ctx)?);
            }
            (f, v)
        }
    })
}

fn invariance(a: &CheckArgs, out: &mut Vec<Finding>) -> CliResult<()> {
    let ctx = || "invariance".to_string();
    if a.family == FamilyName::Bernoulli {
        let p = Family::bernoulli(a.n).context(ctx)?;
        let t = p.with_chart(Chart::LogOdds).context(ctx)?;
        let pts = interior_grid(a.grid.min(19).max(1));
        let pairs = [
            ("y", lift_point_estimator(&p, "y", count), lift_point_estimator(&t, "y", count)),
            (
                "y(y-1)",
                lift_point_estimator(&p, "y(y-1)", |y| count(y) * (count(y) - 1.0)),
                lift_point_estimator(&t, "y(y-1)", |y| count(y) * (count(y) - 1.0)),
            ),
        ];
        for (name, gp, gt) in pairs {
            let (gp, gt) = (gp.context(ctx)?, gt.context(ctx)?);
            for &p0 in &pts {
                let d = (lambda_efficiency(&gp, p0).context(ctx)? - lambda_efficiency(&gt, logit(p0)).context(ctx)?).abs();
                out.push(Finding {
                    property: "invariance_chart",
                    estimator: name.into(),
                    theta: p0,
                    value: d,
                    tolerance: 1e-8,
                });
            }
        }
        for g in bernoulli_statistics(a.n).context(ctx)? {
            let k = g.rescaled("k g", |th: f64| 2.0 + th.sin());
            for &p0 in &pts {
                let s = squared_slope(&g, p0).context(ctx)?;
                let d = (s - squared_slope(&k, p0).context(ctx)?).abs() / s.max(1.0);
                out.push(Finding {
                    property: "invariance_rescale",
                    estimator: label(&g),
                    theta: p0,
                    value: d,
                    tolerance: 1e-8,
                });
            }
        }
        let u = lift_point_estimator(&p, "y^2", |y| count(y).powi(2)).context(ctx)?;
        let w = lift_point_estimator(&p, "3y^2-7", |y| 3.0 * count(y).powi(2) - 7.0).context(ctx)?;
        for &p0 in &pts {
            let d = (score_correlation2(&u, p0).context(ctx)? - score_correlation2(&w, p0).context(ctx)?).abs();
            out.push(Finding {
                property: "invariance_affine",
                estimator: "3y^2-7".into(),
                theta: p0,
                value: d,
                tolerance: 1e-8,
            });
        }
        // the standardized score is the same function of y in both charts
        let (sp, st) = (score_estimator(&p), score_estimator(&t));
        for &p0 in &pts {
            let mut d = 0.0f64;
            for y in 0..=a.n {
                let s = Sample::Count(y);
                d = d.max((standardize(&sp, p0, &s).context(ctx)? - standardize(&st, logit(p0), &s).context(ctx)?).abs());
            }
            out.push(Finding {
                property: "invariance_chart",
                estimator: "standardized score".into(),
                theta: p0,
                value: d,
                tolerance: 1e-8,
            });
        }
    }
    let demo = two_submanifold_demo(Axis::First, a.n.max(1), 0.0).context(ctx)?;
    out.push(Finding {
        property: "submanifold",
        estimator: "xbar1".into(),
        theta: 0.0,
        value: (demo.x1.lambda - demo.n as f64).abs(),
        tolerance: 0.0,
    });
    out.push(Finding {
        property: "submanifold",
        estimator: "xbar2".into(),
        theta: 0.0,
        value: demo.x2.lambda.abs(),
        tolerance: 0.0,
    });
    Ok(())
}

pub fn check(a: &CheckArgs) -> CliResult<()> {
    let started = Instant::now();
    if a.grid == 0 {
        return Err(CliError::Usage("--grid must be at least 1".into()));
    }
    let (fam, estimators) = battery(a)?;
    let identity_tol = if a.family == FamilyName::Bernoulli { 1e-8 } else { 1e-6 };
    let mut findings = Vec::new();
    for g in &estimators {
        for th in grid(&fam, a.grid) {
            let ctx = || format!("{} at {th}", label(g));
            let m = g.moments(th).context(ctx)?;
            findings.push(Finding {
                property: "identity",
                estimator: label(g),
                theta: th,
                value: check_identity(g, th).context(ctx)?,
                tolerance: identity_tol,
            });
            findings.push(Finding {
                property: "bound",
                estimator: label(g),
                theta: th,
                value: (m.lambda() - m.info * (1.0 + 1e-8)).max(0.0),
                tolerance: 0.0,
            });
        }
    }
    invariance(a, &mut findings)?;

    let mut t = Table::create(&a.out, "check", &["property", "estimator", "theta", "value", "tolerance", "pass"])?;
    for f in &findings {
        t.row([
            f.property.to_string(),
            f.estimator.clone(),
            real(f.theta),
            real(f.value),
            real(f.tolerance),
            flag(f.pass()),
        ])?;
    }
    let out = t.finish()?;
    RunManifest::write(&manifest_path(&out), "check", flags_json(a), None, &[out], started)?;

    let mut props: Vec<&str> = Vec::new();
    for f in &findings {
        if !props.contains(&f.property) {
            props.push(f.property);
        }
    }
    for p in &props {
        let rows: Vec<&Finding> = findings.iter().filter(|f| f.property == *p).collect();
        let worst = rows.iter().map(|f| f.value).fold(0.0, f64::max);
        let failed = rows.iter().filter(|f| !f.pass()).count();
        println!(
            "{:<20} {:>4} checks  worst {:.2e}  {}",
            p,
            rows.len(),
            worst,
            if failed == 0 { "ok".to_string() } else { format!("{failed} FAILED") }
        );
    }
    match findings.iter().find(|f| !f.pass()) {
        Some(f) => Err(CliError::Property(format!(
            "{} for {} at theta={}: {:.3e} > {:.1e}",
            f.property, f.estimator, f.theta, f.value, f.tolerance
        ))),
        None => Ok(()),
    }
}
