//! Confidence intervals from generalized estimates: score inversion, the
//! likelihood-ratio level set, Wald linearizations and the exact Bernoulli
//! tail-area inversion.

use statrs::function::factorial::ln_binomial;

use crate::error::{Error, Result};
use crate::families::{cauchy_loglik, cauchy_score, Family, FamilyId, Sample};

/// Endpoint tolerance in the parameter.
pub const ENDPOINT_TOL: f64 = 1e-10;
const MAX_DOUBLINGS: u32 = 60;
const SCAN_POINTS: usize = 64;
const HULL_GRID: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    ScoreInversion,
    Lrt,
    WaldExpected,
    WaldObserved,
    ExactBernoulli,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::ScoreInversion => "score_inversion",
            Method::Lrt => "lrt",
            Method::WaldExpected => "wald_expected",
            Method::WaldObserved => "wald_observed",
            Method::ExactBernoulli => "exact_bernoulli",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub method: Method,
    /// The `k` or `z` defining the interval; `alpha` for the exact interval.
    pub level_k: f64,
    /// Slope of the linearization for Wald intervals.
    pub slope_b: Option<f64>,
    /// Multiplier applied to `z`.
    pub adjustment: f64,
    /// The likelihood-ratio level set was not connected; `lo..hi` is its hull.
    pub disconnected: bool,
}

impl Interval {
    fn new(lo: f64, hi: f64, method: Method, level_k: f64) -> Self {
        Self {
            lo,
            hi,
            method,
            level_k,
            slope_b: None,
            adjustment: 1.0,
            disconnected: false,
        }
    }

    pub fn contains(&self, theta: f64) -> bool {
        self.lo < theta && theta < self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Global maximizer of the Cauchy location log-likelihood for sorted `x`.
///
/// Scans the score on `[x(1), x(n)]` at spacing `(x(n) - x(1)) / 2000`,
/// augmented with the observations, their pairwise midpoints and a few
/// offsets around each observation. Every `+ -> -` sign change is refined by
/// bisection and the root with the largest log-likelihood wins (ties go to
/// the smaller root).
pub fn cauchy_mle(x: &[f64]) -> Result<f64> {
    if x.is_empty() || x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("cauchy mle needs finite observations".into()));
    }
    let lo = x[0];
    let hi = x[x.len() - 1];
    if x.len() == 1 || lo == hi {
        return Ok(lo);
    }
    let step = (hi - lo) / 2000.0;
    let mut nodes: Vec<f64> = (0..=2000).map(|i| lo + step * i as f64).collect();
    nodes.push(hi);
    for (i, &xi) in x.iter().enumerate() {
        nodes.push(xi);
        if let Some(&next) = x.get(i + 1) {
            nodes.push(0.5 * (xi + next));
        }
        for d in [0.25, 0.5, 1.0, 2.0] {
            for c in [xi - d, xi + d] {
                if c > lo && c < hi {
                    nodes.push(c);
                }
            }
        }
    }
    nodes.sort_by(f64::total_cmp);
    nodes.dedup();

    let scores: Vec<f64> = nodes.iter().map(|&t| cauchy_score(x, t)).collect();
    let mut best: Option<(f64, f64)> = None;
    let mut consider = |t: f64| {
        let l = cauchy_loglik(x, t);
        best = match best {
            Some((bt, bl)) if bl > l || (bl == l && bt <= t) => Some((bt, bl)),
            _ => Some((t, l)),
        };
    };
    for i in 0..nodes.len() {
        if scores[i] == 0.0 {
            consider(nodes[i]);
        }
        if i + 1 < nodes.len() && scores[i] > 0.0 && scores[i + 1] < 0.0 {
            let root = bisect(|t| cauchy_score(x, t), nodes[i], nodes[i + 1], ENDPOINT_TOL);
            consider(root);
        }
    }
    best.map(|(t, _)| t)
        .ok_or_else(|| Error::Domain("no stationary point of the cauchy likelihood".into()))
}

/// Root of `h` in `[a, b]` given `h(a) > 0 >= h(b)` (or the mirror image),
/// to width `tol`.
fn bisect<H: Fn(f64) -> f64>(h: H, mut a: f64, mut b: f64, tol: f64) -> f64 {
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        if h(m) > 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Observed information `-l''` at a local maximum.
pub fn observed_info(f: &Family, theta_hat: f64, y: &Sample) -> Result<f64> {
    let info = -f.score_deriv(theta_hat, y)?;
    if info > 0.0 && info.is_finite() {
        Ok(info)
    } else {
        Err(Error::NonPositiveCurvature { theta: theta_hat, info })
    }
}

/// Information used to standardize the score. Location families have a
/// constant value, computed once.
fn info_fn(f: &Family, at: f64) -> Result<Box<dyn Fn(f64) -> f64 + '_>> {
    match f.id() {
        FamilyId::Bernoulli { .. } => Ok(Box::new(move |t| f.fisher_info(t).unwrap_or(f64::NAN))),
        _ => {
            let i = f.fisher_info(if at.is_finite() { at } else { 0.0 })?;
            Ok(Box::new(move |_| i))
        }
    }
}

enum Edge {
    At(f64),
    Boundary(f64),
    Missing,
}

/// Segment ends moving from `start` toward `bound`.
fn outward_ends(start: f64, dir: f64, bound: f64, init_step: f64) -> Vec<f64> {
    if bound.is_finite() {
        (1..=MAX_DOUBLINGS)
            .map(|j| bound - (bound - start) * 0.5f64.powi(j as i32))
            .collect()
    } else {
        (0..=MAX_DOUBLINGS)
            .map(|j| start + dir * init_step * 2f64.powi(j as i32))
            .collect()
    }
}

/// First point moving outward from `start` where `h <= 0`; `h(start) > 0`
/// is assumed.
fn first_exit<H: Fn(f64) -> f64>(h: &H, start: f64, dir: f64, bound: f64, init_step: f64) -> Edge {
    let mut prev = start;
    for end in outward_ends(start, dir, bound, init_step) {
        for i in 1..=SCAN_POINTS {
            let t = prev + (end - prev) * i as f64 / SCAN_POINTS as f64;
            if h(t) <= 0.0 {
                let inside = prev + (end - prev) * (i - 1) as f64 / SCAN_POINTS as f64;
                return Edge::At(bisect(h, inside, t, ENDPOINT_TOL));
            }
        }
        prev = end;
    }
    if bound.is_finite() {
        Edge::Boundary(bound)
    } else {
        Edge::Missing
    }
}

/// `{theta : -k < g_bar(theta) < k}` for the standardized score.
pub fn score_interval(f: &Family, y: &Sample, k: f64) -> Result<Interval> {
    if !(k >= 0.0) || !k.is_finite() {
        return Err(Error::Domain(format!("level k must be finite and nonnegative, got {k}")));
    }
    f.check_sample(y)?;
    let root = f.mle(y)?;
    if !root.is_finite() {
        return Err(Error::Nonexistence(format!(
            "the score has no root in the {} chart",
            f.chart().name()
        )));
    }
    let info = info_fn(f, root)?;
    let g_bar = |t: f64| f.score_unchecked(t, y) / info(t).sqrt();
    let (dom_lo, dom_hi) = f.param_domain();
    let init = if f.in_domain(root) { 50.0 / info(root).sqrt() } else { 1.0 };

    let upper = |t: f64| g_bar(t) + k;
    let lower = |t: f64| k - g_bar(t);
    let hi = if root >= dom_hi {
        Edge::Boundary(dom_hi)
    } else {
        first_exit(&upper, root, 1.0, dom_hi, init)
    };
    let lo = if root <= dom_lo {
        Edge::Boundary(dom_lo)
    } else {
        first_exit(&lower, root, -1.0, dom_lo, init)
    };
    let (lo, hi) = match (lo, hi) {
        (Edge::Missing, _) => {
            return Err(Error::Nonexistence(format!("g_bar never reaches +{k} below the root")))
        }
        (_, Edge::Missing) => {
            return Err(Error::Nonexistence(format!("g_bar never reaches -{k} above the root")))
        }
        (Edge::At(a) | Edge::Boundary(a), Edge::At(b) | Edge::Boundary(b)) => (a, b),
    };

    // strict monotonicity over the interval, by sampling
    if hi > lo {
        let pts: Vec<f64> = (0..SCAN_POINTS)
            .map(|i| lo + (hi - lo) * (i as f64 + 0.5) / SCAN_POINTS as f64)
            .filter(|t| f.in_domain(*t))
            .map(g_bar)
            .collect();
        if pts.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::NonMonotone(format!("standardized score on ({lo}, {hi})")));
        }
    }
    Ok(Interval::new(lo, hi, Method::ScoreInversion, k))
}

/// The likelihood-ratio generalized estimate `S(theta) = 2 (l(theta) - sup l)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LrtEstimate {
    family: Family,
    sample: Sample,
    mle: f64,
    sup: f64,
}

impl LrtEstimate {
    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn sample(&self) -> &Sample {
        &self.sample
    }

    /// Maximizer; may sit on the domain boundary for Bernoulli counts 0 and n.
    pub fn mle(&self) -> f64 {
        self.mle
    }

    pub fn eval(&self, theta: f64) -> f64 {
        if theta == self.mle {
            return 0.0;
        }
        2.0 * (self.family.loglik_unchecked(theta, &self.sample) - self.sup)
    }

    /// `sign(mle - theta) sqrt(-S(theta))`.
    pub fn signed_root(&self, theta: f64) -> f64 {
        let s = (-self.eval(theta)).max(0.0).sqrt();
        if self.mle >= theta {
            s
        } else {
            -s
        }
    }

    /// Beyond this point on each side the log-likelihood falls monotonically.
    fn monotone_from(&self) -> (f64, f64) {
        match &self.sample {
            Sample::Values(v) => (v[0].min(self.mle), v[v.len() - 1].max(self.mle)),
            _ => (self.mle, self.mle),
        }
    }

    /// Nodes where the likelihood can change shape: observations and the
    /// midpoints between them.
    fn knots(&self) -> Vec<f64> {
        match &self.sample {
            Sample::Values(v) => {
                let mut k = v.clone();
                k.extend(v.windows(2).map(|w| 0.5 * (w[0] + w[1])));
                k
            }
            _ => Vec::new(),
        }
    }
}

pub fn lrt_estimate(f: &Family, y: &Sample) -> Result<LrtEstimate> {
    f.check_sample(y)?;
    let mle = f.mle(y)?;
    let sup = f.sup_loglik(y)?;
    Ok(LrtEstimate {
        family: *f,
        sample: y.clone(),
        mle,
        sup,
    })
}

/// Outermost roots of `S(theta) = -z^2`: the hull of `{S > -z^2}`.
pub fn lrt_interval(l: &LrtEstimate, z: f64) -> Result<Interval> {
    if !(z >= 0.0) || !z.is_finite() {
        return Err(Error::Domain(format!("z must be finite and nonnegative, got {z}")));
    }
    let f = &l.family;
    let (dom_lo, dom_hi) = f.param_domain();
    if !l.mle.is_finite() {
        return Err(Error::Nonexistence("the likelihood is maximized at infinity".into()));
    }
    if z == 0.0 {
        return Ok(Interval::new(l.mle, l.mle, Method::Lrt, z));
    }
    let init = if f.in_domain(l.mle) {
        let i = info_fn(f, l.mle)?(l.mle);
        1.0 / i.sqrt()
    } else {
        0.1
    };
    let z2 = z * z;
    let h = |t: f64| l.eval(t) + z2;
    let (mono_lo, mono_hi) = l.monotone_from();
    let knots = l.knots();

    let mut disconnected = false;
    let mut side = |dir: f64, bound: f64, mono: f64| -> Result<f64> {
        if l.mle == bound {
            return Ok(bound);
        }
        let mut far = None;
        for end in outward_ends(l.mle, dir, bound, init) {
            if (end - mono) * dir >= 0.0 && h(end) <= 0.0 {
                far = Some(end);
                break;
            }
        }
        let Some(far) = far else {
            return if bound.is_finite() {
                Ok(bound)
            } else {
                Err(Error::BracketExpansion {
                    doublings: MAX_DOUBLINGS,
                })
            };
        };
        let mut nodes: Vec<f64> = (1..=HULL_GRID)
            .map(|i| l.mle + (far - l.mle) * i as f64 / HULL_GRID as f64)
            .collect();
        nodes.extend(
            outward_ends(l.mle, dir, bound, init)
                .into_iter()
                .filter(|e| (e - l.mle) * dir > 0.0 && (far - e) * dir > 0.0),
        );
        nodes.extend(knots.iter().copied().filter(|e| (e - l.mle) * dir > 0.0 && (far - e) * dir > 0.0));
        nodes.sort_by(|a, b| (a * dir).total_cmp(&(b * dir)));
        nodes.dedup();
        let vals: Vec<f64> = nodes.iter().map(|&t| h(t)).collect();
        let last_inside = vals.iter().rposition(|v| *v > 0.0);
        let (a, b) = match last_inside {
            Some(i) => (nodes[i], nodes[i + 1]),
            None => (l.mle, nodes[0]),
        };
        if let Some(i) = last_inside {
            if vals[..i].iter().any(|v| *v <= 0.0) {
                disconnected = true;
            }
        }
        Ok(bisect(h, a, b, ENDPOINT_TOL))
    };
    let hi = side(1.0, dom_hi, mono_hi)?;
    let lo = side(-1.0, dom_lo, mono_lo)?;
    let mut iv = Interval::new(lo, hi, Method::Lrt, z);
    iv.disconnected = disconnected;
    Ok(iv)
}

/// `center +/- adjustment * z / sqrt(info)`.
pub fn wald_interval(center: f64, info: f64, z: f64, adjustment: f64, method: Method) -> Result<Interval> {
    if !(info > 0.0) || !info.is_finite() {
        return Err(Error::Domain(format!("wald interval needs positive information, got {info}")));
    }
    if !center.is_finite() || !(z >= 0.0) || !(adjustment > 0.0) {
        return Err(Error::Domain("wald interval needs finite center, z >= 0, adjustment > 0".into()));
    }
    let slope = info.sqrt();
    let half = adjustment * z / slope;
    Ok(Interval {
        slope_b: Some(-slope),
        adjustment,
        ..Interval::new(center - half, center + half, method, z)
    })
}

fn binom_pmf(n: u32, j: u32, p: f64) -> f64 {
    let lp = if j == 0 { 0.0 } else { j as f64 * p.ln() };
    let lq = if j == n { 0.0 } else { (n - j) as f64 * (-p).ln_1p() };
    (ln_binomial(n as u64, j as u64) + lp + lq).exp()
}

/// `P_p(Y >= y)`.
pub fn binom_upper_tail(n: u32, y: u32, p: f64) -> f64 {
    (y..=n).map(|j| binom_pmf(n, j, p)).sum()
}

/// `P_p(Y <= y)`.
pub fn binom_lower_tail(n: u32, y: u32, p: f64) -> f64 {
    (0..=y).map(|j| binom_pmf(n, j, p)).sum()
}

/// Inverts the exact binomial tail areas at `alpha / 2` per side.
pub fn exact_bernoulli_interval(n: u32, y: u32, alpha: f64) -> Result<Interval> {
    if y > n || n == 0 {
        return Err(Error::Domain(format!("need 0 <= y <= n and n >= 1, got y={y}, n={n}")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let half = alpha / 2.0;
    let lo = if y == 0 {
        0.0
    } else {
        // upper tail increases in p
        bisect(|p| half - binom_upper_tail(n, y, p), 0.0, 1.0, 1e-15)
    };
    let hi = if y == n {
        1.0
    } else {
        // lower tail decreases in p
        bisect(|p| binom_lower_tail(n, y, p) - half, 0.0, 1.0, 1e-15)
    };
    Ok(Interval::new(lo, hi, Method::ExactBernoulli, alpha))
}
