//! Expectations over a family's sample space.
//!
//! Finite sample spaces are summed exactly, one-dimensional continuous ones
//! are integrated, and the full Cauchy sample falls back to seeded Monte
//! Carlo with a reported standard error.

use crate::error::{Error, Result};
use crate::families::{cauchy_pdf, Family, FamilyId, Sample};
use crate::quad::{integrate_line, QuadConfig};
use crate::rng::stream_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpectMethod {
    ExactSum,
    Quadrature,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Expectation {
    pub value: f64,
    /// Zero for exact sums; the quadrature error bound; or the Monte Carlo
    /// standard error.
    pub std_error: f64,
    pub method: ExpectMethod,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpectConfig {
    pub quad: QuadConfig,
    pub mc_draws: usize,
    pub mc_seed: u64,
    /// Largest acceptable Monte Carlo standard error, if any.
    pub mc_max_std_error: Option<f64>,
}

impl Default for ExpectConfig {
    fn default() -> Self {
        Self {
            quad: QuadConfig::default(),
            mc_draws: 1_000_000,
            mc_seed: 0x5eed_0001,
            mc_max_std_error: None,
        }
    }
}

/// `E_theta phi(y)` with the default engine settings.
pub fn expect<F>(f: &Family, theta: f64, phi: F) -> Result<Expectation>
where
    F: Fn(&Sample) -> f64,
{
    expect_with(f, theta, phi, &ExpectConfig::default())
}

pub fn expect_with<F>(f: &Family, theta: f64, phi: F, cfg: &ExpectConfig) -> Result<Expectation>
where
    F: Fn(&Sample) -> f64,
{
    if !f.in_domain(theta) {
        return Err(Error::Domain(format!("parameter {theta} outside the domain")));
    }
    match f.id() {
        FamilyId::Bernoulli { .. } => {
            let support = f.finite_support().expect("bernoulli is finite");
            let value = support
                .iter()
                .map(|y| phi(y) * f.density_unchecked(theta, y))
                .sum();
            Ok(Expectation {
                value,
                std_error: 0.0,
                method: ExpectMethod::ExactSum,
            })
        }
        FamilyId::NormalLocation { sigma, n } => {
            let scale = sigma / (n as f64).sqrt();
            line(f, theta, scale, Sample::Mean, phi, &cfg.quad)
        }
        FamilyId::CauchyMedian { .. } => line(f, theta, 1.0, Sample::Median, phi, &cfg.quad),
        FamilyId::CauchyLocation { .. } => monte_carlo(f, theta, phi, cfg),
    }
}

fn line<F, M>(
    f: &Family,
    theta: f64,
    scale: f64,
    make: M,
    phi: F,
    quad: &QuadConfig,
) -> Result<Expectation>
where
    F: Fn(&Sample) -> f64,
    M: Fn(f64) -> Sample,
{
    let q = integrate_line(
        |z| {
            let y = make(z);
            let d = f.density_unchecked(theta, &y);
            if d == 0.0 {
                0.0
            } else {
                phi(&y) * d
            }
        },
        theta,
        scale,
        quad,
    )?;
    Ok(Expectation {
        value: q.value,
        std_error: q.abs_error,
        method: ExpectMethod::Quadrature,
    })
}

fn monte_carlo<F>(f: &Family, theta: f64, phi: F, cfg: &ExpectConfig) -> Result<Expectation>
where
    F: Fn(&Sample) -> f64,
{
    let draws = cfg.mc_draws.max(2);
    let mut rng = stream_rng(cfg.mc_seed, 0);
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for i in 0..draws {
        let y = f.sample_from(theta, &mut rng)?;
        let v = phi(&y);
        let delta = v - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (v - mean);
    }
    let std_error = (m2 / (draws - 1) as f64 / draws as f64).sqrt();
    if let Some(max) = cfg.mc_max_std_error {
        if !(std_error <= max) {
            return Err(Error::McBudget { draws, std_error });
        }
    }
    Ok(Expectation {
        value: mean,
        std_error,
        method: ExpectMethod::MonteCarlo,
    })
}

/// Expectation of a per-observation quantity `phi(x)` under one draw of the
/// Cauchy location model. Sums of such terms over an i.i.d. sample reduce
/// to this one-dimensional integral.
pub fn expect_observation<F>(f: &Family, theta: f64, phi: F, quad: &QuadConfig) -> Result<Expectation>
where
    F: Fn(f64) -> f64,
{
    match f.id() {
        FamilyId::CauchyLocation { .. } => {
            let q = integrate_line(|x| phi(x) * cauchy_pdf(x - theta), theta, 1.0, quad)?;
            Ok(Expectation {
                value: q.value,
                std_error: q.abs_error,
                method: ExpectMethod::Quadrature,
            })
        }
        other => Err(Error::Unsupported(format!(
            "per-observation expectation for {other:?}"
        ))),
    }
}
