#![allow(dead_code)]

use slope_lab::families::cauchy_loglik;
use statrs::function::beta::beta_reg;

/// Log-likelihood through one logarithm of a product, falling back to the
/// sum of logs when the product overflows.
fn fast_loglik(x: &[f64], t: f64) -> f64 {
    let mut prod = 1.0;
    for xi in x {
        let w = xi - t;
        prod *= w.mul_add(w, 1.0);
    }
    if prod.is_finite() {
        -prod.ln() - x.len() as f64 * std::f64::consts::PI.ln()
    } else {
        cauchy_loglik(x, t)
    }
}

fn golden_max(x: &[f64], mut a: f64, mut b: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (cauchy_loglik(x, c), cauchy_loglik(x, d));
    for _ in 0..200 {
        if b - a < 1e-13 * (1.0 + a.abs()) {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = cauchy_loglik(x, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = cauchy_loglik(x, d);
        }
    }
    let t = 0.5 * (a + b);
    (t, cauchy_loglik(x, t))
}

/// Maximum of the Cauchy log-likelihood for sorted `x` by scanning a
/// million-point grid over the data range, then polishing the three best
/// grid maxima by golden section.
pub fn brute_force_cauchy_max(x: &[f64]) -> (f64, f64) {
    const POINTS: usize = 1_000_000;
    let (lo, hi) = (x[0], x[x.len() - 1]);
    if lo == hi {
        return (lo, cauchy_loglik(x, lo));
    }
    let step = (hi - lo) / (POINTS - 1) as f64;
    let vals: Vec<f64> = (0..POINTS).map(|i| fast_loglik(x, lo + step * i as f64)).collect();
    let mut peaks: Vec<usize> = (0..POINTS)
        .filter(|&i| (i == 0 || vals[i] >= vals[i - 1]) && (i + 1 == POINTS || vals[i] >= vals[i + 1]))
        .collect();
    peaks.sort_by(|a, b| vals[*b].total_cmp(&vals[*a]));
    peaks
        .into_iter()
        .take(3)
        .map(|i| {
            let t = lo + step * i as f64;
            golden_max(x, (t - step).max(lo), (t + step).min(hi))
        })
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap()
}

fn solve_increasing(f: impl Fn(f64) -> f64, target: f64) -> f64 {
    let (mut a, mut b) = (0.0, 1.0);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if f(m) < target {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Clopper-Pearson limits from beta quantiles, inverted by bisection on the
/// regularized incomplete beta function.
pub fn clopper_pearson(n: u32, y: u32, alpha: f64) -> (f64, f64) {
    let (nf, yf) = (n as f64, y as f64);
    let lo = if y == 0 {
        0.0
    } else {
        solve_increasing(|p| beta_reg(yf, nf - yf + 1.0, p), alpha / 2.0)
    };
    let hi = if y == n {
        1.0
    } else {
        solve_increasing(|p| beta_reg(yf + 1.0, nf - yf, p), 1.0 - alpha / 2.0)
    };
    (lo, hi)
}
