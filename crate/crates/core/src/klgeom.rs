//! Kullback-Leibler divergence, KL balls and the parameter-invariant KL
//! length of an interval.

use crate::error::{Error, Result};
use crate::families::{logistic, median_density, Chart, Family, FamilyId};
use crate::intervals::Interval;
use crate::quad::{integrate_line, QuadConfig};

const CENTER_TOL: f64 = 1e-10;

/// `{m : D(m, center) < radius}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KlBall {
    pub center: f64,
    pub radius: f64,
}

impl KlBall {
    pub fn contains(&self, f: &Family, theta: f64) -> Result<bool> {
        Ok(kl_divergence(f, theta, self.center)? < self.radius)
    }
}

fn check(f: &Family, theta: f64) -> Result<()> {
    let (lo, hi) = f.param_domain();
    if theta.is_finite() && theta >= lo && theta <= hi {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "{theta} outside the closed {} parameter range",
            f.chart().name()
        )))
    }
}

fn xlogy_ratio(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        0.0
    } else if b == 0.0 {
        f64::INFINITY
    } else {
        a * (a / b).ln()
    }
}

/// `D(m1, m2) = E_{m1} log(m1 / m2)`.
///
/// The Cauchy location divergence is that of a single observation,
/// `log((t1 - t2)^2 + 4) - log 4`, whatever the sample size. Bernoulli
/// parameters may sit on the closed boundary.
pub fn kl_divergence(f: &Family, theta1: f64, theta2: f64) -> Result<f64> {
    check(f, theta1)?;
    check(f, theta2)?;
    if theta1 == theta2 {
        return Ok(0.0);
    }
    let d = theta1 - theta2;
    match f.id() {
        FamilyId::CauchyLocation { .. } => Ok((d * d + 4.0).ln() - 4f64.ln()),
        FamilyId::NormalLocation { sigma, n } => Ok(n as f64 * d * d / (2.0 * sigma * sigma)),
        FamilyId::Bernoulli { n } => {
            let (p1, p2) = match f.chart() {
                Chart::LogOdds => (logistic(theta1), logistic(theta2)),
                _ => (theta1, theta2),
            };
            Ok(n as f64 * (xlogy_ratio(p1, p2) + xlogy_ratio(1.0 - p1, 1.0 - p2)))
        }
        FamilyId::CauchyMedian { k } => {
            let cfg = QuadConfig::default();
            let q = integrate_line(
                |z| {
                    let a = median_density(k, z, theta1);
                    if a == 0.0 {
                        0.0
                    } else {
                        a * (a / median_density(k, z, theta2)).ln()
                    }
                },
                theta1,
                1.0,
                &cfg,
            )?;
            Ok(q.value.max(0.0))
        }
    }
}

/// Smallest KL ball covering `(lo, hi)`, with the center searched on
/// `[lo, hi]` by golden section.
pub fn kl_cover(f: &Family, iv: &Interval) -> Result<KlBall> {
    if !(iv.lo <= iv.hi) || !iv.lo.is_finite() || !iv.hi.is_finite() {
        return Err(Error::Domain(format!("interval ({}, {}) has no finite KL cover", iv.lo, iv.hi)));
    }
    if iv.lo == iv.hi {
        check(f, iv.lo)?;
        return Ok(KlBall {
            center: iv.lo,
            radius: 0.0,
        });
    }
    let cost = |c: f64| -> Result<f64> { Ok(kl_divergence(f, iv.lo, c)?.max(kl_divergence(f, iv.hi, c)?)) };
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (iv.lo, iv.hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = cost(c)?;
    let mut fd = cost(d)?;
    while b - a > CENTER_TOL {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = cost(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = cost(d)?;
        }
        if c >= d {
            break;
        }
    }
    let center = 0.5 * (a + b);
    Ok(KlBall {
        center,
        radius: cost(center)?,
    })
}

/// Radius of the smallest KL ball covering the interval.
pub fn kl_length(f: &Family, iv: &Interval) -> Result<f64> {
    Ok(kl_cover(f, iv)?.radius)
}
