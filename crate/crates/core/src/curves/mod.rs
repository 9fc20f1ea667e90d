//! Constructive smooth curves.
//!
//! The key construction interpolates a fast-falling sequence: when
//! n^n * d(x_n, x) stays bounded, a smooth curve passes through x_n at
//! parameter 1/2^n and through the limit at 0, flat there. Between dyadic
//! nodes the curve walks the chart segment from x_{n+1} to x_n, reclocked by
//! a step profile that is flat at both ends, so all derivatives vanish at
//! the nodes and the pieces glue smoothly; the growth condition keeps every
//! divided difference bounded as the nodes accumulate at 0.
//!
//! Sequences in countable products are handled by extracting a subsequence
//! that falls fast in the product metric and interpolating factorwise.
//!
//! Charts are global linear lifts, so the spaces are Euclidean, circles and
//! tori; these cover every level space with smooth structure in this crate.

mod bump_sum;
mod probe;

pub use bump_sum::{bump_sum_eval, standard_bump};
pub use probe::{
    boman_harness, geodesic_differential, smoothness_probe, HarnessReport, ProbeOrderReport,
    ProbeReport, ProbeTarget,
};

use crate::error::{Error, Result};
use crate::family::LevelSpace;
use crate::numdiff;
use std::sync::Arc;

/// A transition profile on [0, 1]: 0 at 0, 1 at 1, strictly increasing, all
/// one-sided derivatives vanishing at both ends.
#[derive(Clone, Copy, Debug, Default)]
pub struct SmoothStep;

impl SmoothStep {
    /// sigma(s) = exp(-1/s) on s > 0, extended by 0.
    fn sigma(s: f64) -> f64 {
        if s <= 0.0 {
            0.0
        } else {
            (-1.0 / s).exp()
        }
    }

    fn sigma_prime(s: f64) -> f64 {
        if s <= 0.0 {
            0.0
        } else {
            (-1.0 / s).exp() / (s * s)
        }
    }

    pub fn value(s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        if s >= 1.0 {
            return 1.0;
        }
        let a = Self::sigma(s);
        let b = Self::sigma(1.0 - s);
        a / (a + b)
    }

    pub fn derivative(s: f64) -> f64 {
        if s <= 0.0 || s >= 1.0 {
            return 0.0;
        }
        let a = Self::sigma(s);
        let b = Self::sigma(1.0 - s);
        let da = Self::sigma_prime(s);
        let db = -Self::sigma_prime(1.0 - s);
        (da * (a + b) - a * (da + db)) / ((a + b) * (a + b))
    }
}

/// A parametrized curve into a chart of a level space.
#[derive(Clone)]
pub struct SmoothCurve {
    domain: (f64, f64),
    eval: Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>,
    derivative: Option<Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>>,
}

impl std::fmt::Debug for SmoothCurve {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SmoothCurve")
            .field("domain", &self.domain)
            .field("analytic_derivative", &self.derivative.is_some())
            .finish()
    }
}

impl SmoothCurve {
    pub fn new<F>(domain: (f64, f64), eval: F) -> SmoothCurve
    where
        F: Fn(f64) -> Vec<f64> + Send + Sync + 'static,
    {
        SmoothCurve {
            domain,
            eval: Arc::new(eval),
            derivative: None,
        }
    }

    pub fn with_derivative<F, G>(domain: (f64, f64), eval: F, derivative: G) -> SmoothCurve
    where
        F: Fn(f64) -> Vec<f64> + Send + Sync + 'static,
        G: Fn(f64) -> Vec<f64> + Send + Sync + 'static,
    {
        SmoothCurve {
            domain,
            eval: Arc::new(eval),
            derivative: Some(Arc::new(derivative)),
        }
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn at(&self, s: f64) -> Vec<f64> {
        (self.eval)(s)
    }

    /// Analytic velocity when present, else central differences.
    pub fn velocity(&self, s: f64) -> Vec<f64> {
        match &self.derivative {
            Some(d) => d(s),
            None => {
                let eval = self.eval.clone();
                let dim = eval(s).len();
                (0..dim)
                    .map(|c| numdiff::derivative(|t| eval(t)[c], s, 1e-5))
                    .collect()
            }
        }
    }

    /// Product of factor curves, coordinates concatenated.
    pub fn product(curves: Vec<SmoothCurve>) -> SmoothCurve {
        let domain = curves
            .iter()
            .map(|c| c.domain)
            .fold((f64::NEG_INFINITY, f64::INFINITY), |(lo, hi), (a, b)| {
                (lo.max(a), hi.min(b))
            });
        let all = curves.clone();
        let eval = move |s: f64| all.iter().flat_map(|c| c.at(s)).collect();
        let vel = move |s: f64| curves.iter().flat_map(|c| c.velocity(s)).collect();
        SmoothCurve::with_derivative(domain, eval, vel)
    }
}

/// Lift points of the space to a global linear chart centered at `center`:
/// angular coordinates move to the representative within half a period of
/// the center, linear coordinates are untouched.
fn lift_to_chart(space: &LevelSpace, center: &[f64], pt: &[f64]) -> Result<Vec<f64>> {
    let periods = space.coordinate_periods().ok_or_else(|| {
        Error::BadArgument("space has no smooth chart (discrete levels)".into())
    })?;
    Ok(pt
        .iter()
        .zip(center)
        .zip(&periods)
        .map(|((x, c), period)| match period {
            None => *x,
            Some(t) => {
                let mut d = (x - c).rem_euclid(*t);
                if d > t / 2.0 {
                    d -= t;
                }
                c + d
            }
        })
        .collect())
}

/// Interpolate a fast-falling sequence: a smooth curve with c(1/2^n) = x_n
/// (x_1 is the first entry of `points`), c(s) = x for s <= 0, flat at 0.
///
/// Requires n^n * distance(x_n, x) <= rho for every provided point; the
/// offending n is named otherwise.
pub fn special_curve(
    points: &[Vec<f64>],
    limit: &[f64],
    space: &LevelSpace,
    rho: f64,
) -> Result<SmoothCurve> {
    if points.is_empty() {
        return Err(Error::BadArgument("need at least one point".into()));
    }
    if rho <= 0.0 {
        return Err(Error::BadArgument("rho must be positive".into()));
    }
    let log_rho = rho.ln();
    for (k, pt) in points.iter().enumerate() {
        let n = k + 1;
        let d = space.distance(pt, limit);
        // compare n^n * d <= rho in the log domain; d = 0 always passes
        if d > 0.0 && (n as f64) * (n as f64).ln() + d.ln() > log_rho + 1e-12 {
            return Err(Error::Growth {
                n,
                value: ((n as f64) * (n as f64).ln() + d.ln()).exp(),
                bound: rho,
            });
        }
    }
    let chart: Vec<Vec<f64>> = points
        .iter()
        .map(|p| lift_to_chart(space, limit, p))
        .collect::<Result<_>>()?;
    let limit = limit.to_vec();
    let count = chart.len();
    let dim = limit.len();
    let limit0 = limit.clone();

    let segment = move |s: f64| -> (Vec<f64>, Vec<f64>, f64, f64) {
        // returns (from, to, u, du/ds) with c(s) = from + phi(u) (to - from)
        if s >= 0.5 {
            return (chart[0].clone(), chart[0].clone(), 1.0, 0.0);
        }
        // find n with s in [2^-(n+1), 2^-n), i.e. the segment to x_n
        let n = (-s.log2()).floor() as usize; // s in [2^-(n+1), 2^-n) gives n >= 1
        if n >= count {
            // below the last provided node: ramp from the limit to x_count
            let lo = 0.0;
            let hi = 0.5f64.powi(count as i32);
            let u = (s - lo) / (hi - lo);
            return (limit.clone(), chart[count - 1].clone(), u, 1.0 / (hi - lo));
        }
        let lo = 0.5f64.powi(n as i32 + 1);
        let hi = 0.5f64.powi(n as i32);
        let u = (s - lo) / (hi - lo);
        (chart[n].clone(), chart[n - 1].clone(), u, 1.0 / (hi - lo))
    };

    let seg = segment.clone();
    let eval = move |s: f64| -> Vec<f64> {
        if s <= 0.0 {
            return limit0.clone();
        }
        let (from, to, u, _) = seg(s);
        let w = SmoothStep::value(u);
        (0..dim).map(|c| from[c] + w * (to[c] - from[c])).collect()
    };
    let vel = move |s: f64| -> Vec<f64> {
        if s <= 0.0 {
            return vec![0.0; dim];
        }
        let (from, to, u, rate) = segment(s);
        let dw = SmoothStep::derivative(u) * rate;
        (0..dim).map(|c| dw * (to[c] - from[c])).collect()
    };
    Ok(SmoothCurve::with_derivative((f64::NEG_INFINITY, 0.5), eval, vel))
}

/// Greedy subsequence extraction and factorwise interpolation for a
/// convergent sequence in a finite product: returns the chosen indices
/// (0-based into `points`) and a product curve with c(1/2^r) = points[k_r],
/// c(0) = limit.
///
/// The product metric weights factor n by 2^-(n+1) and normalizes each
/// factor distance to at most 1, so convergence in it is componentwise
/// convergence.
pub fn curve_through_sequence(
    points: &[Vec<f64>],
    limit: &[f64],
    space: &LevelSpace,
    rho: f64,
) -> Result<(Vec<usize>, SmoothCurve)> {
    let LevelSpace::FiniteProduct { factors } = space else {
        return Err(Error::BadArgument("expected a finite product space".into()));
    };
    let product_metric = |a: &[f64], b: &[f64]| -> f64 {
        let mut acc = 0.0;
        let mut at = 0;
        for (n, f) in factors.iter().enumerate() {
            let d = f.dimension();
            let df = f.distance(&a[at..at + d], &b[at..at + d]);
            acc += 0.5f64.powi(n as i32 + 1) * df / (1.0 + df);
            at += d;
        }
        acc
    };

    // k_r = first index after k_{r-1} with r^r d(x_k, x) <= rho
    let mut chosen: Vec<usize> = Vec::new();
    let mut next = 0usize;
    let mut r = 1usize;
    let log_rho = rho.ln();
    loop {
        let mut found = None;
        for (k, pt) in points.iter().enumerate().skip(next) {
            let d = product_metric(pt, limit);
            let ok = d == 0.0 || (r as f64) * (r as f64).ln() + d.ln() <= log_rho + 1e-12;
            if ok {
                found = Some(k);
                break;
            }
        }
        match found {
            Some(k) => {
                chosen.push(k);
                next = k + 1;
                r += 1;
            }
            None => {
                if chosen.is_empty() {
                    return Err(Error::BadArgument(
                        "insufficient data: no index satisfies the growth bound".into(),
                    ));
                }
                break;
            }
        }
        if next >= points.len() {
            break;
        }
    }

    // factorwise special curves through the extracted subsequence
    let mut at = 0;
    let mut factor_curves = Vec::new();
    for f in factors {
        let d = f.dimension();
        let sub: Vec<Vec<f64>> = chosen
            .iter()
            .map(|k| points[*k][at..at + d].to_vec())
            .collect();
        let sub_limit = limit[at..at + d].to_vec();
        // the factor growth bound is finite because the data is; compute it
        let mut factor_rho = 1e-300f64;
        for (j, pt) in sub.iter().enumerate() {
            let n = (j + 1) as f64;
            let dist = f.distance(pt, &sub_limit);
            if dist > 0.0 {
                factor_rho = factor_rho.max((n * n.ln() + dist.ln()).exp());
            }
        }
        factor_curves.push(special_curve(&sub, &sub_limit, f, factor_rho * (1.0 + 1e-9))?);
        at += d;
    }
    Ok((chosen, SmoothCurve::product(factor_curves)))
}
