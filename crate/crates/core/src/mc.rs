//! Seeded Monte Carlo for interval coverage in the Cauchy location family.
//!
//! Replicate `r` draws its sample from stream `r` of the configured seed, so
//! results do not depend on how replicates are scheduled across threads.

use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::families::{Family, Sample};
use crate::gcore::expect;
use crate::intervals::{lrt_estimate, lrt_interval, observed_info, wald_interval, Interval, Method};
use crate::klgeom::kl_length;
use crate::rng::stream_rng;

pub const DEFAULT_SEED: u64 = 0x51_0e_1a_b0;
/// Environment variable capping worker threads.
pub const THREADS_ENV: &str = "SLOPE_LAB_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SimMethod {
    WaldExpected,
    WaldObserved,
    Lrt,
}

impl SimMethod {
    pub const ALL: [SimMethod; 3] = [SimMethod::WaldExpected, SimMethod::WaldObserved, SimMethod::Lrt];

    pub fn name(self) -> &'static str {
        match self {
            SimMethod::WaldExpected => "wald_expected",
            SimMethod::WaldObserved => "wald_observed",
            SimMethod::Lrt => "lrt",
        }
    }

    pub fn short(self) -> &'static str {
        match self {
            SimMethod::WaldExpected => "we",
            SimMethod::WaldObserved => "wo",
            SimMethod::Lrt => "lrt",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.name() == s || m.short() == s)
    }

    fn index(self) -> usize {
        self as usize
    }
}

/// Multipliers on `z` per method.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Adjustments {
    pub wald_expected: f64,
    pub wald_observed: f64,
    pub lrt: f64,
}

impl Adjustments {
    /// Nominal intervals.
    pub fn raw() -> Self {
        Self {
            wald_expected: 1.0,
            wald_observed: 1.0,
            lrt: 1.0,
        }
    }

    pub fn get(&self, m: SimMethod) -> f64 {
        match m {
            SimMethod::WaldExpected => self.wald_expected,
            SimMethod::WaldObserved => self.wald_observed,
            SimMethod::Lrt => self.lrt,
        }
    }
}

/// Multipliers that equalize the three coverage errors at `n = 15`.
impl Default for Adjustments {
    fn default() -> Self {
        Self {
            wald_expected: 1.08555,
            wald_observed: 1.05518,
            lrt: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub n: u32,
    pub reps: usize,
    pub theta_true: f64,
    pub seed: u64,
    pub alpha: f64,
    pub adjustments: Adjustments,
    pub methods: Vec<SimMethod>,
    /// Worker count; falls back to `SLOPE_LAB_THREADS`, then rayon's default.
    pub threads: Option<usize>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n: 15,
            reps: 100_000,
            theta_true: 0.0,
            seed: DEFAULT_SEED,
            alpha: 0.05,
            adjustments: Adjustments::default(),
            methods: SimMethod::ALL.to_vec(),
            threads: None,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::Domain("reps must be at least 1".into()));
        }
        if self.n == 0 {
            return Err(Error::Domain("n must be at least 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Domain(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if !self.theta_true.is_finite() {
            return Err(Error::Domain("theta_true must be finite".into()));
        }
        if SimMethod::ALL
            .iter()
            .any(|m| !(self.adjustments.get(*m) > 0.0) || !self.adjustments.get(*m).is_finite())
        {
            return Err(Error::Domain("adjustments must be positive".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::Domain("no interval methods selected".into()));
        }
        if self.threads == Some(0) {
            return Err(Error::Domain("threads must be at least 1".into()));
        }
        Ok(())
    }

    /// Standard normal quantile at `1 - alpha/2`.
    pub fn z(&self) -> f64 {
        Normal::standard().inverse_cdf(1.0 - self.alpha / 2.0)
    }

    fn has(&self, m: SimMethod) -> bool {
        self.methods.contains(&m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MethodOutcome {
    pub hit: bool,
    pub kl_length: f64,
    pub width: f64,
}

/// One replicate. On failure the numeric fields are NaN and `failure` holds
/// the solver error.
#[derive(Debug, Clone, PartialEq)]
pub struct Replicate {
    pub rep: usize,
    pub theta_hat: f64,
    pub i_obs: f64,
    pub outcomes: [Option<MethodOutcome>; 3],
    /// `sign(theta_hat - theta) sqrt(-S(theta))` at the true value.
    pub signed_root: f64,
    /// Score at the true value divided by `sqrt(I)`.
    pub score_at_true: f64,
    pub median: f64,
    pub failure: Option<Error>,
}

impl Replicate {
    pub fn outcome(&self, m: SimMethod) -> Option<&MethodOutcome> {
        self.outcomes[m.index()].as_ref()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MethodSummary {
    pub method: SimMethod,
    pub adjustment: f64,
    pub coverage_error: f64,
    pub se: f64,
    pub mean_kl_length: f64,
    pub mean_width: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimSummary {
    pub config: SimConfig,
    pub z: f64,
    pub methods: Vec<MethodSummary>,
    pub replicates: Vec<Replicate>,
    pub failures: usize,
}

impl SimSummary {
    pub fn method(&self, m: SimMethod) -> Option<&MethodSummary> {
        self.methods.iter().find(|s| s.method == m)
    }

    fn ok(&self) -> impl Iterator<Item = &Replicate> {
        self.replicates.iter().filter(|r| r.failure.is_none())
    }
}

fn simulate_one(cfg: &SimConfig, f: &Family, z: f64, rep: usize) -> Result<Replicate> {
    let mut rng = stream_rng(cfg.seed, rep as u64);
    let y = f.sample_from(cfg.theta_true, &mut rng)?;
    let x = match &y {
        Sample::Values(v) => v,
        _ => unreachable!("cauchy samples are value vectors"),
    };
    let lrt = lrt_estimate(f, &y)?;
    let theta_hat = lrt.mle();
    let i_obs = observed_info(f, theta_hat, &y)?;
    let info = f.fisher_info(theta_hat)?;
    let mut outcomes = [None; 3];
    for m in SimMethod::ALL {
        if !cfg.has(m) {
            continue;
        }
        let adj = cfg.adjustments.get(m);
        let iv: Interval = match m {
            SimMethod::WaldExpected => wald_interval(theta_hat, info, z, adj, Method::WaldExpected)?,
            SimMethod::WaldObserved => wald_interval(theta_hat, i_obs, z, adj, Method::WaldObserved)?,
            SimMethod::Lrt => {
                let mut iv = lrt_interval(&lrt, adj * z)?;
                iv.adjustment = adj;
                iv
            }
        };
        outcomes[m.index()] = Some(MethodOutcome {
            hit: iv.contains(cfg.theta_true),
            kl_length: kl_length(f, &iv)?,
            width: iv.width(),
        });
    }
    Ok(Replicate {
        rep,
        theta_hat,
        i_obs,
        outcomes,
        signed_root: lrt.signed_root(cfg.theta_true),
        score_at_true: f.score(cfg.theta_true, &y)? / info.sqrt(),
        median: x[x.len() / 2],
        failure: None,
    })
}

fn worker_count(cfg: &SimConfig) -> Option<usize> {
    cfg.threads.or_else(|| {
        std::env::var(THREADS_ENV)
            .ok()
            .and_then(|s| s.trim().parse::<usize>().ok())
            .filter(|t| *t > 0)
    })
}

/// Runs every replicate and aggregates coverage, KL length and width per
/// method. More than 0.01% failed replicates aborts the run; fewer are
/// excluded from the aggregates and kept in the table.
pub fn run_coverage(cfg: &SimConfig) -> Result<SimSummary> {
    cfg.validate()?;
    let f = Family::cauchy_location(cfg.n)?;
    let z = cfg.z();
    let work = |rep: usize| match simulate_one(cfg, &f, z, rep) {
        Ok(r) => r,
        Err(e) => Replicate {
            rep,
            theta_hat: f64::NAN,
            i_obs: f64::NAN,
            outcomes: [None; 3],
            signed_root: f64::NAN,
            score_at_true: f64::NAN,
            median: f64::NAN,
            failure: Some(e),
        },
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = worker_count(cfg) {
        builder = builder.num_threads(t);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Unsupported(format!("thread pool: {e}")))?;
    let replicates: Vec<Replicate> = pool.install(|| (0..cfg.reps).into_par_iter().map(work).collect());

    let failures = replicates.iter().filter(|r| r.failure.is_some()).count();
    if failures as f64 > 1e-4 * cfg.reps as f64 {
        return Err(Error::SimulationAborted {
            failures,
            reps: cfg.reps,
        });
    }
    let mut summary = SimSummary {
        config: cfg.clone(),
        z,
        methods: Vec::new(),
        replicates,
        failures,
    };
    summary.methods = SimMethod::ALL
        .into_iter()
        .filter(|m| cfg.has(*m))
        .map(|m| summarize(&summary, m))
        .collect();
    Ok(summary)
}

fn summarize(s: &SimSummary, m: SimMethod) -> MethodSummary {
    let (mut count, mut misses, mut kl, mut width) = (0usize, 0usize, 0.0, 0.0);
    for o in s.ok().filter_map(|r| r.outcome(m)) {
        count += 1;
        misses += usize::from(!o.hit);
        kl += o.kl_length;
        width += o.width;
    }
    let c = count.max(1) as f64;
    let e = misses as f64 / c;
    MethodSummary {
        method: m,
        adjustment: s.config.adjustments.get(m),
        coverage_error: e,
        se: (e * (1.0 - e) / c).sqrt(),
        mean_kl_length: kl / c,
        mean_width: width / c,
    }
}

/// Coverage error per method within one observed-information bin.
#[derive(Debug, Clone, PartialEq)]
pub struct ObsInfoBin {
    pub bin: usize,
    pub i_obs_lo: f64,
    pub i_obs_hi: f64,
    pub count: usize,
    /// `(method, coverage error, standard error)`.
    pub errors: Vec<(SimMethod, f64, f64)>,
}

impl ObsInfoBin {
    pub fn error(&self, m: SimMethod) -> Option<(f64, f64)> {
        self.errors.iter().find(|e| e.0 == m).map(|e| (e.1, e.2))
    }
}

/// Splits successful replicates, ordered by observed information, into
/// `bins` groups of equal count.
pub fn bin_by_obs_info(s: &SimSummary, bins: usize) -> Result<Vec<ObsInfoBin>> {
    let mut ok: Vec<&Replicate> = s.ok().collect();
    if bins == 0 || bins > ok.len() {
        return Err(Error::Domain(format!("need 1 <= bins <= {}, got {bins}", ok.len())));
    }
    ok.sort_by(|a, b| a.i_obs.total_cmp(&b.i_obs));
    let m = ok.len();
    Ok((0..bins)
        .map(|b| {
            let part = &ok[b * m / bins..(b + 1) * m / bins];
            let errors = s
                .methods
                .iter()
                .map(|ms| {
                    let outs: Vec<_> = part.iter().filter_map(|r| r.outcome(ms.method)).collect();
                    let c = outs.len().max(1) as f64;
                    let e = outs.iter().filter(|o| !o.hit).count() as f64 / c;
                    (ms.method, e, (e * (1.0 - e) / c).sqrt())
                })
                .collect();
            ObsInfoBin {
                bin: b,
                i_obs_lo: part[0].i_obs,
                i_obs_hi: part[part.len() - 1].i_obs,
                count: part.len(),
                errors,
            }
        })
        .collect())
}

pub fn coverage_by_obs_info(cfg: &SimConfig, bins: usize) -> Result<Vec<ObsInfoBin>> {
    bin_by_obs_info(&run_coverage(cfg)?, bins)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QqStatistic {
    SignedRootLrt,
    StandardizedScoreAtTrue,
    MedianStandardized,
}

impl QqStatistic {
    pub const ALL: [QqStatistic; 3] = [
        QqStatistic::SignedRootLrt,
        QqStatistic::StandardizedScoreAtTrue,
        QqStatistic::MedianStandardized,
    ];

    pub fn name(self) -> &'static str {
        match self {
            QqStatistic::SignedRootLrt => "signed_root_lrt",
            QqStatistic::StandardizedScoreAtTrue => "standardized_score_at_true",
            QqStatistic::MedianStandardized => "median_standardized",
        }
    }
}

/// Standard deviation of the sample median of `n` (odd) Cauchy draws.
pub fn median_sd(n: u32) -> Result<f64> {
    if n % 2 == 0 {
        return Err(Error::Domain(format!("the median law needs odd n, got {n}")));
    }
    let f = Family::cauchy_median((n - 1) / 2);
    let v = expect(&f, 0.0, |y| y.as_real().unwrap_or(f64::NAN).powi(2))?;
    Ok(v.value.sqrt())
}

/// Sorted `(normal quantile, empirical quantile)` pairs, the normal
/// quantiles taken at `(i - 0.5) / m`.
pub fn qq_from(s: &SimSummary, stat: QqStatistic) -> Result<Vec<(f64, f64)>> {
    let theta = s.config.theta_true;
    let mut v: Vec<f64> = match stat {
        QqStatistic::SignedRootLrt => s.ok().map(|r| r.signed_root).collect(),
        QqStatistic::StandardizedScoreAtTrue => s.ok().map(|r| r.score_at_true).collect(),
        QqStatistic::MedianStandardized => {
            let sd = median_sd(s.config.n)?;
            s.ok().map(|r| (r.median - theta) / sd).collect()
        }
    };
    v.sort_by(f64::total_cmp);
    let m = v.len() as f64;
    let nd = Normal::standard();
    Ok(v.into_iter()
        .enumerate()
        .map(|(i, e)| (nd.inverse_cdf((i as f64 + 0.5) / m), e))
        .collect())
}

pub fn qq_data(cfg: &SimConfig, stat: QqStatistic) -> Result<Vec<(f64, f64)>> {
    qq_from(&run_coverage(cfg)?, stat)
}

/// Largest `|empirical - normal|` over pairs whose probability level lies
/// in the central `central` mass.
pub fn max_quantile_gap(pairs: &[(f64, f64)], central: f64) -> f64 {
    let m = pairs.len() as f64;
    let tail = (1.0 - central) / 2.0;
    pairs
        .iter()
        .enumerate()
        .filter(|(i, _)| {
            let q = (*i as f64 + 0.5) / m;
            q >= tail && q <= 1.0 - tail
        })
        .map(|(_, (a, b))| (a - b).abs())
        .fold(0.0, f64::max)
}

/// Mean KL lengths with the equalizing adjustments applied.
pub fn mean_kl_lengths(cfg: &SimConfig) -> Result<Vec<(SimMethod, f64)>> {
    let cfg = SimConfig {
        adjustments: Adjustments::default(),
        ..cfg.clone()
    };
    Ok(run_coverage(&cfg)?
        .methods
        .iter()
        .map(|m| (m.method, m.mean_kl_length))
        .collect())
}
