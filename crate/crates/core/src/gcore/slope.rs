use crate::error::{Error, Result};

use super::estimator::{EstimatorKind, GenEstimator};

/// Squared slope `(E g')^2 / V(g)`.
pub fn squared_slope(g: &GenEstimator, theta: f64) -> Result<f64> {
    Ok(g.moments(theta)?.lambda())
}

/// `rho^2(g, l') = E(g l')^2 / (V(g) I)`.
pub fn score_correlation2(g: &GenEstimator, theta: f64) -> Result<f64> {
    Ok(g.moments(theta)?.rho2())
}

/// `Lambda(g) / I`.
pub fn lambda_efficiency(g: &GenEstimator, theta: f64) -> Result<f64> {
    let m = g.moments(theta)?;
    Ok(m.lambda() / m.info)
}

/// `rho^2 n`, the sample size at which the score matches the slope of `g`.
pub fn effective_n(g: &GenEstimator, theta: f64) -> Result<f64> {
    Ok(g.moments(theta)?.rho2() * g.family().sample_size() as f64)
}

/// `I^-1 / V(u)` for a lift of an unbiased statistic.
pub fn v_efficiency(g: &GenEstimator, theta: f64) -> Result<f64> {
    if !matches!(g.kind(), EstimatorKind::LiftedPoint { .. }) {
        return Err(Error::Unsupported("variance efficiency needs a lifted point estimator".into()));
    }
    let bias = g.mean_value(theta)? - theta;
    if bias.abs() >= 1e-8 {
        return Err(Error::Biased { theta, bias });
    }
    let m = g.moments(theta)?;
    Ok(1.0 / (m.info * m.variance))
}

/// `|-E g' - E(g l')|`, zero when differentiation under the integral holds.
pub fn check_identity(g: &GenEstimator, theta: f64) -> Result<f64> {
    Ok(g.moments(theta)?.identity_residual())
}

/// Slope summaries of one estimator over a parameter grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SlopeReport {
    pub grid: Vec<f64>,
    pub lambda: Vec<f64>,
    pub rho2: Vec<f64>,
    pub eff_lambda: Vec<f64>,
    pub eff_n: Vec<f64>,
    pub info: Vec<f64>,
    pub identity_residual: Vec<f64>,
}

pub fn slope_report(g: &GenEstimator, grid: &[f64]) -> Result<SlopeReport> {
    let n = g.family().sample_size() as f64;
    let mut r = SlopeReport {
        grid: grid.to_vec(),
        lambda: Vec::with_capacity(grid.len()),
        rho2: Vec::with_capacity(grid.len()),
        eff_lambda: Vec::with_capacity(grid.len()),
        eff_n: Vec::with_capacity(grid.len()),
        info: Vec::with_capacity(grid.len()),
        identity_residual: Vec::with_capacity(grid.len()),
    };
    for &t in grid {
        let m = g.moments(t)?;
        let rho2 = m.rho2();
        r.lambda.push(m.lambda());
        r.rho2.push(rho2);
        r.eff_lambda.push(m.lambda() / m.info);
        r.eff_n.push(rho2 * n);
        r.info.push(m.info);
        r.identity_residual.push(m.identity_residual());
    }
    Ok(r)
}
