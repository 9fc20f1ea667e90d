//! Smoothness probes and the curve/function duality harness.
//!
//! A function is smooth along a curve exactly when the composition is a
//! smooth real function; at desk scale this is certified through order-4
//! divided differences whose estimates must be stable under halving the
//! stencil step. For products of circles and lines, cylindrical smooth
//! functions compose smoothly with every structure curve (families of
//! per-factor smooth curves), and the harness samples that statement with
//! random trigonometric curves. Only this direction is machine-checkable:
//! that every smooth function is locally cylindrical is a statement about
//! all curves at once.

use crate::cylinder::CylFunction;
use crate::curves::SmoothCurve;
use crate::error::{Error, Result};
use crate::expr::{random_trig_poly, Expr};
use crate::family::{Index, ProjectiveFamily};
use crate::numdiff;
use rand::rngs::StdRng;
use rand::SeedableRng;
use serde::Serialize;
use std::f64::consts::TAU;
use std::sync::Arc;

/// Default stencil step for probes.
pub const PROBE_STEP: f64 = 2e-3;
/// Pass threshold for the grid-halving variation.
pub const PROBE_THRESHOLD: f64 = 1e-2;

/// A function of the full factor coordinates.
pub type RawTarget = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// What the harness probes: a cylindrical function, or a raw function of
/// the full factor coordinates (the planted counterexamples).
#[derive(Clone)]
pub enum ProbeTarget {
    Cyl(CylFunction),
    Raw(RawTarget),
}

impl ProbeTarget {
    pub fn raw<F>(f: F) -> ProbeTarget
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        ProbeTarget::Raw(Arc::new(f))
    }

    /// Evaluate on full factor coordinates.
    fn eval_full(&self, full: &[f64]) -> Result<f64> {
        match self {
            ProbeTarget::Raw(f) => Ok(f(full)),
            ProbeTarget::Cyl(f) => {
                let ids = f.level().as_subset().ok_or_else(|| {
                    Error::BadIndex(f.level().to_string(), "expected a subset level".into())
                })?;
                let pt: Vec<f64> = ids.iter().map(|id| full[*id as usize]).collect();
                Ok(f.eval_at(&pt))
            }
        }
    }
}

/// Stability of one divided-difference order under step halving.
#[derive(Clone, Debug, Serialize)]
pub struct ProbeOrderReport {
    pub order: usize,
    pub max_abs_coarse: f64,
    pub max_abs_fine: f64,
    pub max_ratio: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbeReport {
    pub orders: Vec<ProbeOrderReport>,
    pub grid_points: usize,
    pub step: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// Probe the composition f . c for smoothness through `max_order` (at most
/// 4): central divided differences on the grid at step h and h/2 must agree
/// to the threshold, relative to the larger scale (with floor 1).
pub fn smoothness_probe(
    curve: &SmoothCurve,
    f: &dyn Fn(&[f64]) -> f64,
    max_order: usize,
    grid: &[f64],
    step: f64,
) -> Result<ProbeReport> {
    if max_order > 4 || max_order == 0 {
        return Err(Error::BadArgument("probe order must be in 1..=4".into()));
    }
    if grid.is_empty() {
        return Err(Error::BadArgument("empty probe grid".into()));
    }
    let g = |s: f64| f(&curve.at(s));
    let mut orders = Vec::new();
    let mut pass = true;
    for order in 1..=max_order {
        let mut max_coarse: f64 = 0.0;
        let mut max_fine: f64 = 0.0;
        let mut max_diff: f64 = 0.0;
        for &t in grid {
            let coarse = numdiff::central_divided_difference(g, t, order, step);
            let fine = numdiff::central_divided_difference(g, t, order, step / 2.0);
            if !coarse.is_finite() || !fine.is_finite() {
                return Err(Error::BadArgument(format!(
                    "evaluation failure on the grid at t = {t}"
                )));
            }
            max_coarse = max_coarse.max(coarse.abs());
            max_fine = max_fine.max(fine.abs());
            max_diff = max_diff.max((coarse - fine).abs());
        }
        let scale = max_coarse.max(max_fine).max(1.0);
        let ratio = max_diff / scale;
        let ok = ratio <= PROBE_THRESHOLD;
        pass &= ok;
        orders.push(ProbeOrderReport {
            order,
            max_abs_coarse: max_coarse,
            max_abs_fine: max_fine,
            max_ratio: ratio,
            pass: ok,
        });
    }
    Ok(ProbeReport {
        orders,
        grid_points: grid.len(),
        step,
        threshold: PROBE_THRESHOLD,
        pass,
    })
}

/// Aggregate result of the random-curve harness.
#[derive(Clone, Debug, Serialize)]
pub struct HarnessReport {
    pub trials: usize,
    pub failures: usize,
    pub first_failure: Option<usize>,
    pub max_ratio_per_order: Vec<f64>,
    pub pass: bool,
}

/// Sample the duality on a finite product of circles and lines: for `trials`
/// random structure curves (per-factor trigonometric polynomials with
/// bounded coefficients), probe the target through order 4. Cylindrical
/// functions should pass every trial; discontinuous targets fail.
pub fn boman_harness(
    family: &ProjectiveFamily,
    target: &ProbeTarget,
    trials: usize,
    seed: u64,
) -> Result<HarnessReport> {
    let full = full_subset(family)?;
    let space = family.level(&full)?;
    let periods = space.coordinate_periods().ok_or_else(|| {
        Error::BadArgument("family has discrete levels; no smooth curves".into())
    })?;
    let flat: Vec<f64> = periods.iter().map(|p| p.unwrap_or(TAU)).collect();

    let mut rng = StdRng::seed_from_u64(seed);
    let grid: Vec<f64> = (0..21).map(|k| -1.0 + 0.1 * k as f64).collect();
    let mut failures = 0;
    let mut first_failure = None;
    let mut max_ratio = vec![0.0f64; 4];
    for trial in 0..trials {
        // per-factor curve: a trig polynomial in the parameter
        let comps: Vec<Expr> = (0..flat.len())
            .map(|_| random_trig_poly(&[TAU], 2, &mut rng))
            .collect();
        let comps = Arc::new(comps);
        let curve = SmoothCurve::new((-2.0, 2.0), {
            let comps = comps.clone();
            move |s: f64| comps.iter().map(|e| e.eval(&[s])).collect()
        });
        let t = target.clone();
        let report = smoothness_probe(
            &curve,
            &move |full_pt: &[f64]| t.eval_full(full_pt).unwrap_or(f64::NAN),
            4,
            &grid,
            PROBE_STEP,
        )?;
        for (k, o) in report.orders.iter().enumerate() {
            max_ratio[k] = max_ratio[k].max(o.max_ratio);
        }
        if !report.pass {
            failures += 1;
            first_failure.get_or_insert(trial);
        }
    }
    Ok(HarnessReport {
        trials,
        failures,
        first_failure,
        max_ratio_per_order: max_ratio,
        pass: failures == 0,
    })
}

fn full_subset(family: &ProjectiveFamily) -> Result<Index> {
    use crate::family::IndexUniverse;
    match family.universe() {
        IndexUniverse::Subsets { universe } => Ok(Index::subset(0..*universe)),
        _ => Err(Error::BadArgument(
            "harness needs a finite product family".into(),
        )),
    }
}

/// Derivative of f along the geodesic through x with velocity v, at 0: the
/// geodesics of products of flat circles and lines are straight lines in the
/// chart, so this is the one-variable derivative of s -> f(x + s v),
/// computed by central differences with Richardson refinement. Homogeneous
/// in v by reparametrization.
///
/// x and v are full factor coordinate vectors; the function reads the
/// coordinates of its own level.
pub fn geodesic_differential(f: &CylFunction, x: &[f64], v: &[f64]) -> Result<f64> {
    if x.len() != v.len() {
        return Err(Error::BadArgument(
            "point and velocity dimensions differ".into(),
        ));
    }
    let target = ProbeTarget::Cyl(f.clone());
    let g = |s: f64| -> f64 {
        let probe: Vec<f64> = x.iter().zip(v).map(|(a, b)| a + s * b).collect();
        target.eval_full(&probe).unwrap_or(f64::NAN)
    };
    let d = numdiff::derivative(g, 0.0, 1e-3);
    if !d.is_finite() {
        return Err(Error::BadArgument("evaluation failed along the geodesic".into()));
    }
    Ok(d)
}
