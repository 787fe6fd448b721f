//! Generalized estimators: maps `(y, theta) -> g(y, theta)` with
//! `E_theta g(theta) = 0`, finite variance and `E(g l') >= 0`.

use std::fmt;
use std::sync::Arc;

use statrs::function::factorial::ln_binomial;

use crate::error::{Error, Result};
use crate::families::{Chart, Family, FamilyId, Sample};

use super::expect::{expect_observation, expect_with, ExpectConfig};

/// A point statistic `u(y)`.
pub type Statistic = Arc<dyn Fn(&Sample) -> f64 + Send + Sync>;
/// A function of the sample and the parameter.
pub type SampleFn = Arc<dyn Fn(&Sample, f64) -> f64 + Send + Sync>;
/// A function of the parameter alone.
pub type ParamFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EstimatorKind {
    Score,
    LiftedPoint { label: String },
    Custom { label: String },
}

/// How the mean function `v(theta) = E_theta u` of a lift is obtained.
#[derive(Clone)]
pub enum MeanFunction {
    /// Expectation engine for `v`; `v'` by exact binomial differences for
    /// Bernoulli and central differences otherwise.
    Numeric,
    Analytic { value: ParamFn, deriv: ParamFn },
}

#[derive(Clone)]
enum Form {
    Score,
    Lift { stat: Statistic, mean: MeanFunction },
    Custom { eval: SampleFn, deriv: Option<SampleFn> },
}

/// A member of the space of generalized estimators for one family.
#[derive(Clone)]
pub struct GenEstimator {
    family: Family,
    kind: EstimatorKind,
    form: Form,
    cfg: ExpectConfig,
}

impl fmt::Debug for GenEstimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GenEstimator")
            .field("family", &self.family)
            .field("kind", &self.kind)
            .finish_non_exhaustive()
    }
}

/// First and second moments of `g` at one parameter value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub theta: f64,
    /// `E g`, zero up to numerical error.
    pub mean: f64,
    /// `V g`.
    pub variance: f64,
    /// `E g'`, the mean slope in theta.
    pub mean_slope: f64,
    /// `E(g l')`.
    pub score_cov: f64,
    /// Fisher information `I(theta)`.
    pub info: f64,
}

impl Moments {
    /// `(E g')^2 / V(g)`.
    pub fn lambda(&self) -> f64 {
        self.mean_slope * self.mean_slope / self.variance
    }

    /// Squared correlation of `g` with the score.
    pub fn rho2(&self) -> f64 {
        self.score_cov * self.score_cov / (self.variance * self.info)
    }

    /// `|-E g' - E(g l')|`.
    pub fn identity_residual(&self) -> f64 {
        (-self.mean_slope - self.score_cov).abs()
    }
}

/// Central-difference step for derivatives in theta.
pub fn diff_step(theta: f64) -> f64 {
    1e-5 * (1.0 + theta.abs())
}

/// Default evaluation grid: 41 points over `p in [0.02, 0.98]` or
/// `theta in [-4, 4]`.
pub fn default_grid(f: &Family) -> Vec<f64> {
    grid(f, 41)
}

pub fn grid(f: &Family, points: usize) -> Vec<f64> {
    let (lo, hi) = match f.chart() {
        Chart::P => (0.02, 0.98),
        _ => (-4.0, 4.0),
    };
    if points == 1 {
        return vec![0.5 * (lo + hi)];
    }
    (0..points)
        .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
        .collect()
}

/// The score `l'` as a generalized estimator.
pub fn score_estimator(f: &Family) -> GenEstimator {
    GenEstimator {
        family: *f,
        kind: EstimatorKind::Score,
        form: Form::Score,
        cfg: ExpectConfig::default(),
    }
}

/// Lifts a point statistic `u` to `h(y, theta) = u(y) - E_theta u`.
///
/// Fails with an orientation error if `E(h l') < 0` anywhere on the default
/// grid; negate `u` in that case. The grid check is skipped for the full
/// Cauchy sample, whose moments need Monte Carlo; `moments` still checks
/// each parameter value it is asked about.
pub fn lift_point_estimator<U>(f: &Family, label: &str, u: U) -> Result<GenEstimator>
where
    U: Fn(&Sample) -> f64 + Send + Sync + 'static,
{
    let g = GenEstimator {
        family: *f,
        kind: EstimatorKind::LiftedPoint {
            label: label.to_string(),
        },
        form: Form::Lift {
            stat: Arc::new(u),
            mean: MeanFunction::Numeric,
        },
        cfg: ExpectConfig::default(),
    };
    g.check_orientation()?;
    Ok(g)
}

/// Lift with a closed-form mean function and its derivative.
pub fn lift_with_mean<U, V, D>(f: &Family, label: &str, u: U, mean: V, mean_deriv: D) -> Result<GenEstimator>
where
    U: Fn(&Sample) -> f64 + Send + Sync + 'static,
    V: Fn(f64) -> f64 + Send + Sync + 'static,
    D: Fn(f64) -> f64 + Send + Sync + 'static,
{
    let g = GenEstimator {
        family: *f,
        kind: EstimatorKind::LiftedPoint {
            label: label.to_string(),
        },
        form: Form::Lift {
            stat: Arc::new(u),
            mean: MeanFunction::Analytic {
                value: Arc::new(mean),
                deriv: Arc::new(mean_deriv),
            },
        },
        cfg: ExpectConfig::default(),
    };
    g.check_orientation()?;
    Ok(g)
}

impl GenEstimator {
    /// An arbitrary `g(y, theta)`. Without `deriv`, `g'` is taken by central
    /// differences in theta for each sample point.
    pub fn custom<G>(f: &Family, label: &str, eval: G, deriv: Option<SampleFn>) -> Self
    where
        G: Fn(&Sample, f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            family: *f,
            kind: EstimatorKind::Custom {
                label: label.to_string(),
            },
            form: Form::Custom {
                eval: Arc::new(eval),
                deriv,
            },
            cfg: ExpectConfig::default(),
        }
    }

    /// `k(theta) * g(y, theta)`, a member of the same equivalence class when
    /// `k > 0`.
    pub fn rescaled<K>(&self, label: &str, k: K) -> Self
    where
        K: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let base = self.clone();
        Self::custom(
            &self.family,
            label,
            move |y, t| k(t) * base.value(y, t).unwrap_or(f64::NAN),
            None,
        )
    }

    pub fn with_expect_config(mut self, cfg: ExpectConfig) -> Self {
        self.cfg = cfg;
        self
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn kind(&self) -> &EstimatorKind {
        &self.kind
    }

    /// `g(y, theta)`.
    pub fn value(&self, y: &Sample, theta: f64) -> Result<f64> {
        self.family.check_sample(y)?;
        if !self.family.in_domain(theta) {
            return Err(Error::Domain(format!("parameter {theta} outside the domain")));
        }
        match &self.form {
            Form::Score => Ok(self.family.score_unchecked(theta, y)),
            Form::Lift { stat, .. } => Ok(stat(y) - self.mean_value(theta)?),
            Form::Custom { eval, .. } => Ok(eval(y, theta)),
        }
    }

    /// Mean function `v(theta)` of a lift.
    pub fn mean_value(&self, theta: f64) -> Result<f64> {
        match &self.form {
            Form::Lift { stat, mean } => match mean {
                MeanFunction::Analytic { value, .. } => Ok(value(theta)),
                MeanFunction::Numeric => Ok(expect_with(&self.family, theta, |y| stat(y), &self.cfg)?.value),
            },
            _ => Ok(0.0),
        }
    }

    /// `v'(theta)` for a lift.
    pub fn mean_deriv(&self, theta: f64) -> Result<f64> {
        let Form::Lift { stat, mean } = &self.form else {
            return Err(Error::Unsupported("mean derivative of a non-lifted estimator".into()));
        };
        if let MeanFunction::Analytic { deriv, .. } = mean {
            return Ok(deriv(theta));
        }
        if let FamilyId::Bernoulli { n } = self.family.id() {
            // d/dp sum u(y) b(y; n, p) = n sum (u(j+1) - u(j)) b(j; n-1, p)
            let p = self.family.prob(theta);
            let mut acc = 0.0;
            for j in 0..n {
                let du = stat(&Sample::Count(j + 1)) - stat(&Sample::Count(j));
                let lb = ln_binomial((n - 1) as u64, j as u64)
                    + j as f64 * p.ln()
                    + (n - 1 - j) as f64 * (-p).ln_1p();
                acc += du * lb.exp();
            }
            return Ok(n as f64 * acc * self.family.dprob(theta));
        }
        // fourth-order central stencil
        let h = diff_step(theta);
        let at = |k: f64| self.mean_value(theta + k * h);
        let d = (8.0 * (at(1.0)? - at(-1.0)?) - (at(2.0)? - at(-2.0)?)) / (12.0 * h);
        if d.is_finite() {
            Ok(d)
        } else {
            Err(Error::Derivative {
                theta,
                reason: "mean function difference is not finite".into(),
            })
        }
    }

    fn check_orientation(&self) -> Result<()> {
        if matches!(self.family.id(), FamilyId::CauchyLocation { .. }) {
            return Ok(());
        }
        for t in default_grid(&self.family) {
            self.moments(t)?;
        }
        Ok(())
    }

    /// Moments of `g` at `theta`.
    pub fn moments(&self, theta: f64) -> Result<Moments> {
        if !self.family.in_domain(theta) {
            return Err(Error::Domain(format!("parameter {theta} outside the domain")));
        }
        let f = self.family;
        let info = f.fisher_info(theta)?;
        let m = match &self.form {
            Form::Score => self.score_moments(theta, info)?,
            Form::Lift { stat, .. } => {
                let v = self.mean_value(theta)?;
                let h = |y: &Sample| stat(y) - v;
                let mean = self.e(theta, |y| h(y))?;
                let variance = self.e(theta, |y| (h(y) - mean).powi(2))?;
                let score_cov = self.e(theta, |y| h(y) * f.score_unchecked(theta, y))?;
                let mean_slope = -self.mean_deriv(theta)?;
                Moments {
                    theta,
                    mean,
                    variance,
                    mean_slope,
                    score_cov,
                    info,
                }
            }
            Form::Custom { eval, deriv } => {
                let mean = self.e(theta, |y| eval(y, theta))?;
                let variance = self.e(theta, |y| (eval(y, theta) - mean).powi(2))?;
                let score_cov = self.e(theta, |y| eval(y, theta) * f.score_unchecked(theta, y))?;
                let mean_slope = match deriv {
                    Some(d) => self.e(theta, |y| d(y, theta))?,
                    None => {
                        let h = diff_step(theta);
                        let (lo, hi) = (theta - h, theta + h);
                        if !(f.in_domain(lo) && f.in_domain(hi)) {
                            return Err(Error::Derivative {
                                theta,
                                reason: "difference stencil leaves the domain".into(),
                            });
                        }
                        self.e(theta, |y| (eval(y, hi) - eval(y, lo)) / (2.0 * h))?
                    }
                };
                Moments {
                    theta,
                    mean,
                    variance,
                    mean_slope,
                    score_cov,
                    info,
                }
            }
        };
        if !(m.variance > 0.0) || !m.variance.is_finite() {
            return Err(Error::ZeroVariance { theta });
        }
        if !m.mean_slope.is_finite() {
            return Err(Error::Derivative {
                theta,
                reason: "mean slope is not finite".into(),
            });
        }
        if matches!(self.form, Form::Lift { .. }) {
            let scale = (m.variance * m.info).sqrt();
            if m.score_cov < -1e-9 * scale {
                return Err(Error::Orientation {
                    theta,
                    covariance: m.score_cov,
                });
            }
        }
        Ok(m)
    }

    fn e<F: Fn(&Sample) -> f64>(&self, theta: f64, phi: F) -> Result<f64> {
        Ok(expect_with(&self.family, theta, phi, &self.cfg)?.value)
    }

    fn score_moments(&self, theta: f64, info: f64) -> Result<Moments> {
        let f = self.family;
        if let FamilyId::CauchyLocation { n } = f.id() {
            // l' is a sum of i.i.d. terms; reduce to one observation.
            let n = n as f64;
            let q = &self.cfg.quad;
            let s1 = |x: f64| {
                let w = x - theta;
                2.0 * w / (w * w + 1.0)
            };
            let ds1 = |x: f64| {
                let w2 = (x - theta).powi(2);
                -2.0 * (1.0 - w2) / ((1.0 + w2) * (1.0 + w2))
            };
            let mean1 = expect_observation(&f, theta, s1, q)?.value;
            let sq1 = expect_observation(&f, theta, |x| (s1(x) - mean1).powi(2), q)?.value;
            let slope1 = expect_observation(&f, theta, ds1, q)?.value;
            return Ok(Moments {
                theta,
                mean: n * mean1,
                variance: n * sq1,
                mean_slope: n * slope1,
                score_cov: n * sq1,
                info,
            });
        }
        let mean = self.e(theta, |y| f.score_unchecked(theta, y))?;
        let variance = self.e(theta, |y| (f.score_unchecked(theta, y) - mean).powi(2))?;
        let mean_slope = self.e(theta, |y| f.score_deriv_unchecked(theta, y))?;
        let score_cov = self.e(theta, |y| f.score_unchecked(theta, y).powi(2))?;
        Ok(Moments {
            theta,
            mean,
            variance,
            mean_slope,
            score_cov,
            info,
        })
    }
}

/// `g(y, theta) / sqrt(V_theta g)`.
pub fn standardize(g: &GenEstimator, theta: f64, y: &Sample) -> Result<f64> {
    let m = g.moments(theta)?;
    Ok(g.value(y, theta)? / m.variance.sqrt())
}
