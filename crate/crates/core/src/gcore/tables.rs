//! Deterministic tables: the Cauchy median slope table and the Bernoulli
//! efficiency curves.

use crate::error::{Error, Result};
use crate::families::{Family, Sample};

use super::expect::expect;
use super::estimator::{lift_point_estimator, GenEstimator};
use super::slope::lambda_efficiency;

/// One row of the Cauchy median comparison for an odd sample size `n`.
///
/// `median` is the sample median as a point estimate, `median_score` the
/// score of the median's own density, and `score` the full-sample score.
/// Efficiencies are percentages.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CauchyTableRow {
    pub n: u32,
    pub lambda_median: f64,
    pub lambda_median_score: f64,
    pub lambda_score: f64,
    pub eff_median_pct: f64,
    pub eff_median_score_pct: f64,
    pub n_median: f64,
    pub n_median_score: f64,
    /// The median has no finite variance (`n` = 1 or 3); its slope is
    /// reported as zero.
    pub median_variance_diverges: bool,
}

pub fn cauchy_table_row(n: u32) -> Result<CauchyTableRow> {
    if n % 2 == 0 || n == 0 {
        return Err(Error::Domain(format!("table rows need an odd sample size, got {n}")));
    }
    let k = (n - 1) / 2;
    let fam = Family::cauchy_median(k);
    let full = n as f64 / 2.0;
    let lambda_median_score = fam.fisher_info(0.0)?;

    let (lambda_median, diverges) = match expect(&fam, 0.0, |y| y.as_real().unwrap_or(f64::NAN).powi(2)) {
        Err(Error::Quadrature { .. }) => (0.0, true),
        Err(e) => return Err(e),
        Ok(_) => {
            let h = median_lift(&fam)?;
            (h.moments(0.0)?.lambda(), false)
        }
    };

    let eff_median = lambda_median / full;
    let eff_median_score = lambda_median_score / full;
    Ok(CauchyTableRow {
        n,
        lambda_median,
        lambda_median_score,
        lambda_score: full,
        eff_median_pct: 100.0 * eff_median,
        eff_median_score_pct: 100.0 * eff_median_score,
        n_median: n as f64 * eff_median,
        n_median_score: n as f64 * eff_median_score,
        median_variance_diverges: diverges,
    })
}

/// The sample median lifted on the median's own sample space.
pub fn median_lift(fam: &Family) -> Result<GenEstimator> {
    lift_point_estimator(fam, "median", |y: &Sample| y.as_real().unwrap_or(f64::NAN))
}

/// Rows for `n = 1, 3, ..., n_max`.
pub fn cauchy_table(n_max: u32) -> Result<Vec<CauchyTableRow>> {
    (1..=n_max).step_by(2).map(cauchy_table_row).collect()
}

/// Lambda-efficiencies of `y`, `y(y-1)` and `y^2` at one success probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BernoulliEfficiencyRow {
    pub p: f64,
    pub eff_y: f64,
    pub eff_y_y1: f64,
    pub eff_y2: f64,
}

/// The three statistics, lifted in the `p` chart for `n` trials.
pub fn bernoulli_statistics(n: u32) -> Result<[GenEstimator; 3]> {
    let f = Family::bernoulli(n)?;
    let c = |y: &Sample| y.as_count().unwrap_or(0) as f64;
    Ok([
        lift_point_estimator(&f, "y", c)?,
        lift_point_estimator(&f, "y(y-1)", move |y| c(y) * (c(y) - 1.0))?,
        lift_point_estimator(&f, "y^2", move |y| c(y) * c(y))?,
    ])
}

pub fn bernoulli_efficiency_curves(n: u32, grid: &[f64]) -> Result<Vec<BernoulliEfficiencyRow>> {
    if let Some(bad) = grid.iter().find(|p| !(**p > 0.0 && **p < 1.0)) {
        return Err(Error::Domain(format!("grid value {bad} outside (0, 1)")));
    }
    let [u1, u2, u3] = bernoulli_statistics(n)?;
    grid.iter()
        .map(|&p| {
            Ok(BernoulliEfficiencyRow {
                p,
                eff_y: lambda_efficiency(&u1, p)?,
                eff_y_y1: lambda_efficiency(&u2, p)?,
                eff_y2: lambda_efficiency(&u3, p)?,
            })
        })
        .collect()
}

/// `points` equally spaced values strictly inside `(0, 1)`:
/// `1/(points+1), ..., points/(points+1)`.
pub fn interior_grid(points: usize) -> Vec<f64> {
    (1..=points).map(|i| i as f64 / (points + 1) as f64).collect()
}
