//! One-parameter families: Bernoulli (counts), normal location (sample
//! mean), Cauchy location (full ordered sample) and the law of the Cauchy
//! sample median.
//!
//! Log-likelihoods drop the additive constant that depends only on the data,
//! except for the Cauchy location family which keeps `-n log(pi)`.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;
use rand_distr::StandardNormal;
use statrs::function::factorial::ln_binomial;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::quad::{integrate_line, QuadConfig};

/// Parameterization of a family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Chart {
    /// Success probability of a Bernoulli trial.
    P,
    /// `log(p / (1 - p))`.
    LogOdds,
    /// Location parameter of the continuous families.
    Theta,
}

impl Chart {
    pub fn name(self) -> &'static str {
        match self {
            Chart::P => "p",
            Chart::LogOdds => "log-odds",
            Chart::Theta => "theta",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FamilyId {
    /// Sum of `n` Bernoulli trials.
    Bernoulli { n: u32 },
    /// Mean of `n` normal draws with known `sigma`.
    NormalLocation { sigma: f64, n: u32 },
    /// `n` ordered Cauchy draws.
    CauchyLocation { n: u32 },
    /// Median of `2k + 1` Cauchy draws.
    CauchyMedian { k: u32 },
}

/// A family together with the chart its parameter is expressed in.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Family {
    id: FamilyId,
    chart: Chart,
}

/// An observed point of the reduced sample space.
#[derive(Debug, Clone, PartialEq)]
pub enum Sample {
    /// Bernoulli success count.
    Count(u32),
    /// Normal sample mean.
    Mean(f64),
    /// Cauchy sample median.
    Median(f64),
    /// Full Cauchy sample, sorted ascending.
    Values(Vec<f64>),
}

impl Sample {
    /// Builds a full sample, sorting the observations.
    pub fn values(mut v: Vec<f64>) -> Self {
        v.sort_by(f64::total_cmp);
        Sample::Values(v)
    }

    pub fn as_count(&self) -> Option<u32> {
        match *self {
            Sample::Count(y) => Some(y),
            _ => None,
        }
    }

    /// The scalar summary for one-dimensional sample spaces.
    pub fn as_real(&self) -> Option<f64> {
        match *self {
            Sample::Mean(x) | Sample::Median(x) => Some(x),
            Sample::Count(y) => Some(y as f64),
            Sample::Values(_) => None,
        }
    }
}

impl Family {
    pub fn bernoulli(n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("bernoulli needs n >= 1".into()));
        }
        Ok(Self {
            id: FamilyId::Bernoulli { n },
            chart: Chart::P,
        })
    }

    pub fn normal_location(sigma: f64, n: u32) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) || n == 0 {
            return Err(Error::Domain(format!(
                "normal location needs sigma > 0 and n >= 1, got sigma={sigma}, n={n}"
            )));
        }
        Ok(Self {
            id: FamilyId::NormalLocation { sigma, n },
            chart: Chart::Theta,
        })
    }

    pub fn cauchy_location(n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("cauchy location needs n >= 1".into()));
        }
        Ok(Self {
            id: FamilyId::CauchyLocation { n },
            chart: Chart::Theta,
        })
    }

    pub fn cauchy_median(k: u32) -> Self {
        Self {
            id: FamilyId::CauchyMedian { k },
            chart: Chart::Theta,
        }
    }

    /// Same family in another admissible chart.
    pub fn with_chart(self, chart: Chart) -> Result<Self> {
        if !self.admits(chart) {
            return Err(Error::Domain(format!(
                "chart {} is not admissible for {:?}",
                chart.name(),
                self.id
            )));
        }
        Ok(Self { chart, ..self })
    }

    pub fn admits(&self, chart: Chart) -> bool {
        match self.id {
            FamilyId::Bernoulli { .. } => matches!(chart, Chart::P | Chart::LogOdds),
            _ => chart == Chart::Theta,
        }
    }

    pub fn id(&self) -> FamilyId {
        self.id
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }

    /// Number of raw observations behind one sample.
    pub fn sample_size(&self) -> u32 {
        match self.id {
            FamilyId::Bernoulli { n }
            | FamilyId::NormalLocation { n, .. }
            | FamilyId::CauchyLocation { n } => n,
            FamilyId::CauchyMedian { k } => 2 * k + 1,
        }
    }

    /// Open parameter domain in the current chart.
    pub fn param_domain(&self) -> (f64, f64) {
        match self.chart {
            Chart::P => (0.0, 1.0),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    pub fn in_domain(&self, theta: f64) -> bool {
        let (lo, hi) = self.param_domain();
        theta.is_finite() && theta > lo && theta < hi
    }

    fn check_theta(&self, theta: f64) -> Result<()> {
        if self.in_domain(theta) {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "parameter {theta} outside the {} domain",
                self.chart.name()
            )))
        }
    }

    /// Checks that `y` is a point of this family's sample space.
    pub fn check_sample(&self, y: &Sample) -> Result<()> {
        let ok = match (self.id, y) {
            (FamilyId::Bernoulli { n }, Sample::Count(c)) => *c <= n,
            (FamilyId::NormalLocation { .. }, Sample::Mean(x)) => x.is_finite(),
            (FamilyId::CauchyMedian { .. }, Sample::Median(z)) => z.is_finite(),
            (FamilyId::CauchyLocation { n }, Sample::Values(v)) => {
                v.len() == n as usize
                    && v.iter().all(|x| x.is_finite())
                    && v.windows(2).all(|w| w[0] <= w[1])
            }
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!("sample {y:?} is not valid for {:?}", self.id)))
        }
    }

    /// Success probability for a Bernoulli parameter in the current chart.
    pub fn prob(&self, theta: f64) -> f64 {
        match self.chart {
            Chart::LogOdds => logistic(theta),
            _ => theta,
        }
    }

    /// `d p / d theta` for the current chart.
    pub fn dprob(&self, theta: f64) -> f64 {
        match self.chart {
            Chart::LogOdds => {
                let p = logistic(theta);
                p * (1.0 - p)
            }
            _ => 1.0,
        }
    }

    /// Log-likelihood `l(theta; y)`.
    pub fn loglik(&self, theta: f64, y: &Sample) -> Result<f64> {
        self.check_theta(theta)?;
        self.check_sample(y)?;
        Ok(self.loglik_unchecked(theta, y))
    }

    pub(crate) fn loglik_unchecked(&self, theta: f64, y: &Sample) -> f64 {
        match (self.id, y) {
            (FamilyId::Bernoulli { n }, Sample::Count(c)) => {
                let (lp, lq) = self.log_p_q(theta);
                let c = *c as f64;
                // 0 * log(0) contributes nothing at the boundary
                let a = if c > 0.0 { c * lp } else { 0.0 };
                let b = if c < n as f64 { (n as f64 - c) * lq } else { 0.0 };
                a + b
            }
            (FamilyId::NormalLocation { sigma, n }, Sample::Mean(x)) => {
                -(n as f64) * (x - theta).powi(2) / (2.0 * sigma * sigma)
            }
            (FamilyId::CauchyLocation { .. }, Sample::Values(v)) => cauchy_loglik(v, theta),
            (FamilyId::CauchyMedian { k }, Sample::Median(z)) => median_log_density(k, *z, theta),
            _ => f64::NAN,
        }
    }

    fn log_p_q(&self, theta: f64) -> (f64, f64) {
        match self.chart {
            Chart::LogOdds => (-softplus(-theta), -softplus(theta)),
            _ => (theta.ln(), (-theta).ln_1p()),
        }
    }

    /// Score `d l / d theta`.
    pub fn score(&self, theta: f64, y: &Sample) -> Result<f64> {
        self.check_theta(theta)?;
        self.check_sample(y)?;
        Ok(self.score_unchecked(theta, y))
    }

    pub(crate) fn score_unchecked(&self, theta: f64, y: &Sample) -> f64 {
        match (self.id, y) {
            (FamilyId::Bernoulli { n }, Sample::Count(c)) => {
                let p = self.prob(theta);
                let resid = *c as f64 - n as f64 * p;
                match self.chart {
                    Chart::LogOdds => resid,
                    _ => resid / (p * (1.0 - p)),
                }
            }
            (FamilyId::NormalLocation { sigma, n }, Sample::Mean(x)) => {
                n as f64 * (x - theta) / (sigma * sigma)
            }
            (FamilyId::CauchyLocation { .. }, Sample::Values(v)) => cauchy_score(v, theta),
            (FamilyId::CauchyMedian { k }, Sample::Median(z)) => median_score(k, z - theta),
            _ => f64::NAN,
        }
    }

    /// Second derivative `d^2 l / d theta^2`.
    pub fn score_deriv(&self, theta: f64, y: &Sample) -> Result<f64> {
        self.check_theta(theta)?;
        self.check_sample(y)?;
        Ok(self.score_deriv_unchecked(theta, y))
    }

    pub(crate) fn score_deriv_unchecked(&self, theta: f64, y: &Sample) -> f64 {
        match (self.id, y) {
            (FamilyId::Bernoulli { n }, Sample::Count(c)) => {
                let p = self.prob(theta);
                let c = *c as f64;
                let n = n as f64;
                match self.chart {
                    Chart::LogOdds => -n * p * (1.0 - p),
                    _ => -c / (p * p) - (n - c) / ((1.0 - p) * (1.0 - p)),
                }
            }
            (FamilyId::NormalLocation { sigma, n }, Sample::Mean(_)) => -(n as f64) / (sigma * sigma),
            (FamilyId::CauchyLocation { .. }, Sample::Values(v)) => cauchy_score_deriv(v, theta),
            (FamilyId::CauchyMedian { k }, Sample::Median(z)) => median_score_deriv(k, z - theta),
            _ => f64::NAN,
        }
    }

    /// Fisher information of one sample, `V(l') = -E l''`.
    pub fn fisher_info(&self, theta: f64) -> Result<f64> {
        self.check_theta(theta)?;
        match self.id {
            FamilyId::Bernoulli { n } => {
                let p = self.prob(theta);
                let n = n as f64;
                Ok(match self.chart {
                    Chart::LogOdds => n * p * (1.0 - p),
                    _ => n / (p * (1.0 - p)),
                })
            }
            FamilyId::NormalLocation { sigma, n } => Ok(n as f64 / (sigma * sigma)),
            FamilyId::CauchyLocation { n } => Ok(n as f64 / 2.0),
            FamilyId::CauchyMedian { k } => median_fisher_info(k),
        }
    }

    /// Density (or mass) of the sample `y`.
    pub fn density(&self, theta: f64, y: &Sample) -> Result<f64> {
        self.check_theta(theta)?;
        self.check_sample(y)?;
        Ok(self.density_unchecked(theta, y))
    }

    pub(crate) fn density_unchecked(&self, theta: f64, y: &Sample) -> f64 {
        match (self.id, y) {
            (FamilyId::Bernoulli { n }, Sample::Count(c)) => {
                (ln_binomial(n as u64, *c as u64) + self.loglik_unchecked(theta, y)).exp()
            }
            (FamilyId::NormalLocation { sigma, n }, Sample::Mean(x)) => {
                let s = sigma / (n as f64).sqrt();
                let u = (x - theta) / s;
                (-0.5 * u * u).exp() / (s * (2.0 * PI).sqrt())
            }
            (FamilyId::CauchyLocation { .. }, Sample::Values(v)) => {
                v.iter().map(|x| cauchy_pdf(x - theta)).product()
            }
            (FamilyId::CauchyMedian { k }, Sample::Median(z)) => median_density(k, *z, theta),
            _ => f64::NAN,
        }
    }

    /// Draws one sample at `theta`.
    pub fn sample_from<R: Rng + ?Sized>(&self, theta: f64, rng: &mut R) -> Result<Sample> {
        self.check_theta(theta)?;
        Ok(match self.id {
            FamilyId::Bernoulli { n } => {
                let p = self.prob(theta);
                let y = (0..n).filter(|_| rng.random::<f64>() < p).count();
                Sample::Count(y as u32)
            }
            FamilyId::NormalLocation { sigma, n } => {
                let e: f64 = rng.sample(StandardNormal);
                Sample::Mean(theta + sigma / (n as f64).sqrt() * e)
            }
            FamilyId::CauchyLocation { n } => {
                Sample::values((0..n).map(|_| cauchy_draw(theta, rng)).collect())
            }
            FamilyId::CauchyMedian { k } => {
                let mut v: Vec<f64> = (0..2 * k + 1).map(|_| cauchy_draw(theta, rng)).collect();
                let mid = k as usize;
                let (_, m, _) = v.select_nth_unstable_by(mid, f64::total_cmp);
                Sample::Median(*m)
            }
        })
    }

    /// Maximum likelihood estimate in the current chart. Bernoulli counts
    /// at 0 or `n` give the corresponding domain boundary.
    pub fn mle(&self, y: &Sample) -> Result<f64> {
        self.check_sample(y)?;
        Ok(match (self.id, y) {
            (FamilyId::Bernoulli { n }, Sample::Count(c)) => {
                let p = *c as f64 / n as f64;
                match self.chart {
                    Chart::LogOdds => logit(p),
                    _ => p,
                }
            }
            (FamilyId::NormalLocation { .. }, Sample::Mean(x)) => *x,
            (FamilyId::CauchyMedian { .. }, Sample::Median(z)) => *z,
            (FamilyId::CauchyLocation { .. }, Sample::Values(v)) => crate::intervals::cauchy_mle(v)?,
            _ => unreachable!("sample checked above"),
        })
    }

    /// The supremum of the log-likelihood, including boundary limits.
    pub fn sup_loglik(&self, y: &Sample) -> Result<f64> {
        let m = self.mle(y)?;
        if self.in_domain(m) {
            return Ok(self.loglik_unchecked(m, y));
        }
        // Bernoulli boundary: y = 0 or y = n reaches likelihood 1.
        match self.id {
            FamilyId::Bernoulli { .. } => Ok(0.0),
            _ => Err(Error::Domain(format!("mle {m} outside the domain"))),
        }
    }

    /// Every sample point of a finite sample space, with `None` otherwise.
    pub fn finite_support(&self) -> Option<Vec<Sample>> {
        match self.id {
            FamilyId::Bernoulli { n } => Some((0..=n).map(Sample::Count).collect()),
            _ => None,
        }
    }
}

/// Maps a parameter value between two charts of the same family.
pub fn reparam(f: &Family, from: Chart, to: Chart, value: f64) -> Result<f64> {
    if !f.admits(from) || !f.admits(to) {
        return Err(Error::Domain(format!(
            "charts {} -> {} not admissible for {:?}",
            from.name(),
            to.name(),
            f.id()
        )));
    }
    let src = f.with_chart(from)?;
    src.check_theta(value)?;
    Ok(match (from, to) {
        (Chart::P, Chart::LogOdds) => logit(value),
        (Chart::LogOdds, Chart::P) => logistic(value),
        _ => value,
    })
}

pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

pub fn logistic(theta: f64) -> f64 {
    if theta >= 0.0 {
        1.0 / (1.0 + (-theta).exp())
    } else {
        let e = theta.exp();
        e / (1.0 + e)
    }
}

fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

pub fn cauchy_pdf(w: f64) -> f64 {
    1.0 / (PI * (1.0 + w * w))
}

fn cauchy_draw<R: Rng + ?Sized>(theta: f64, rng: &mut R) -> f64 {
    let u: f64 = rng.random();
    theta + (PI * (u - 0.5)).tan()
}

/// `-sum log((x_i - theta)^2 + 1) - n log(pi)`.
pub fn cauchy_loglik(x: &[f64], theta: f64) -> f64 {
    let s: f64 = x.iter().map(|xi| (xi - theta).mul_add(xi - theta, 1.0).ln()).sum();
    -s - x.len() as f64 * PI.ln()
}

pub fn cauchy_score(x: &[f64], theta: f64) -> f64 {
    x.iter()
        .map(|xi| {
            let w = xi - theta;
            2.0 * w / (w * w + 1.0)
        })
        .sum()
}

pub fn cauchy_score_deriv(x: &[f64], theta: f64) -> f64 {
    -x.iter()
        .map(|xi| {
            let w2 = (xi - theta).powi(2);
            2.0 * (1.0 - w2) / ((1.0 + w2) * (1.0 + w2))
        })
        .sum::<f64>()
}

/// `pi^2/4 - arctan^2(w)` evaluated without cancellation in the tails.
fn arctan_gap(w: f64) -> (f64, f64) {
    let a = w.atan();
    let r = if w.abs() > 1.0 {
        (1.0 / w.abs()).atan()
    } else {
        FRAC_PI_2 - a.abs()
    };
    (a, r * (PI - r))
}

fn ln_median_norm(k: u32) -> f64 {
    let k = k as f64;
    ln_gamma(2.0 * k + 2.0) - 2.0 * ln_gamma(k + 1.0) - PI.ln()
}

fn median_log_density(k: u32, z: f64, theta: f64) -> f64 {
    let w = z - theta;
    let (_, gap) = arctan_gap(w);
    let kf = k as f64;
    let bracket = if k == 0 { 0.0 } else { kf * (gap / (PI * PI)).ln() };
    ln_median_norm(k) + bracket - w.mul_add(w, 1.0).ln()
}

/// Density of the median of `2k + 1` standard Cauchy draws located at `theta`.
pub fn median_density(k: u32, z: f64, theta: f64) -> f64 {
    median_log_density(k, z, theta).exp()
}

fn median_score(k: u32, w: f64) -> f64 {
    let (a, gap) = arctan_gap(w);
    let pull = k as f64 * a / gap;
    2.0 * (pull + w) / (1.0 + w * w)
}

fn median_score_deriv(k: u32, w: f64) -> f64 {
    let (a, gap) = arctan_gap(w);
    let kf = k as f64;
    let w2 = 1.0 + w * w;
    let pull = kf * a / gap;
    let dpull = kf * (gap + 2.0 * a * a) / (w2 * gap * gap);
    4.0 * w * (pull + w) / (w2 * w2) - 2.0 * (dpull + 1.0) / w2
}

/// Fisher information of the sample median of `2k + 1` Cauchy draws.
pub fn median_fisher_info(k: u32) -> Result<f64> {
    let cfg = QuadConfig {
        abs_tol: 1e-12,
        rel_tol: 1e-12,
        ..QuadConfig::default()
    };
    let q = integrate_line(
        |w| {
            let s = median_score(k, w);
            s * s * median_density(k, w, 0.0)
        },
        0.0,
        1.0,
        &cfg,
    )?;
    Ok(q.value)
}
