//! Two one-dimensional submanifolds of the unit-variance, zero-correlation
//! bivariate normal family that cross at mean `(0, 0)`.
//!
//! On `M1` (mean `(theta, 0)`) both coordinate means `x1` and `x2` have
//! variance `1/n`, yet only `x1` moves with the parameter. Variance cannot
//! tell them apart; the squared slope can.

use crate::error::{Error, Result};

/// Which coordinate axis the submanifold runs along.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    /// `M1`: mean `(theta, 0)`.
    First,
    /// `M2`: mean `(0, theta)`.
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoordinateSlope {
    pub variance: f64,
    pub lambda: f64,
    pub rho2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubmanifoldDemo {
    pub n: u32,
    pub theta: f64,
    pub info: f64,
    pub x1: CoordinateSlope,
    pub x2: CoordinateSlope,
}

/// Slopes of the two coordinate means on the submanifold along `axis`.
///
/// The coordinate means are independent with variance `1/n`; the score
/// along the submanifold is `n (xbar_j - theta)` for the moving coordinate
/// `j`, so every moment is available in closed form.
pub fn two_submanifold_demo(axis: Axis, n: u32, theta: f64) -> Result<SubmanifoldDemo> {
    if n == 0 || !theta.is_finite() {
        return Err(Error::Domain(format!("need n >= 1 and finite theta, got n={n}, theta={theta}")));
    }
    let nf = n as f64;
    let moving = match axis {
        Axis::First => 0,
        Axis::Second => 1,
    };
    let coord = |j: usize| {
        // mean function slope along the tangent, and Cov(xbar_j, score)
        let (slope, cov) = if j == moving { (1.0, 1.0) } else { (0.0, 0.0) };
        let variance = 1.0 / nf;
        CoordinateSlope {
            variance,
            lambda: slope * slope * nf,
            rho2: cov * cov / (variance * nf),
        }
    };
    Ok(SubmanifoldDemo {
        n,
        theta,
        info: nf,
        x1: coord(0),
        x2: coord(1),
    })
}
