//! Adaptive Simpson quadrature.
//!
//! Absolute-tolerance bisection with the standard 15x error estimate and an
//! interval budget; integrands here are smooth along edge pieces, so the
//! budget is generous headroom rather than a working limit.

use crate::error::{Error, Result};

/// Default absolute tolerance for line integrals.
pub const QUAD_TOL: f64 = 1e-10;
/// Default interval budget.
pub const QUAD_BUDGET: usize = 1 << 20;

pub fn adaptive_simpson(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    tol: f64,
    budget: usize,
) -> Result<f64> {
    if tol <= 0.0 || tol.is_nan() {
        return Err(Error::BadArgument("tolerance must be positive".into()));
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);
    let mut used = 0usize;
    let v = recurse(f, a, b, fa, fm, fb, whole, tol, budget, &mut used)?;
    if !v.is_finite() {
        return Err(Error::Quadrature("non-finite integrand".into()));
    }
    Ok(v)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn recurse(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    budget: usize,
    used: &mut usize,
) -> Result<f64> {
    *used += 1;
    if *used > budget {
        return Err(Error::Quadrature(format!(
            "interval budget {budget} exhausted before reaching tolerance"
        )));
    }
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    let lv = recurse(f, a, m, fa, flm, fm, left, tol / 2.0, budget, used)?;
    let rv = recurse(f, m, b, fm, frm, fb, right, tol / 2.0, budget, used)?;
    Ok(lv + rv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_smooth_functions_to_tolerance() {
        let v = adaptive_simpson(&|x: f64| x.sin(), 0.0, std::f64::consts::PI, 1e-12, QUAD_BUDGET)
            .unwrap();
        assert!((v - 2.0).abs() < 1e-11);

        let v = adaptive_simpson(&|x: f64| (-x * x).exp(), -6.0, 6.0, 1e-10, QUAD_BUDGET).unwrap();
        assert!((v - std::f64::consts::PI.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn budget_exhaustion_is_an_error() {
        let wild = |x: f64| (1.0 / (x + 1e-8)).sin();
        assert!(matches!(
            adaptive_simpson(&wild, 0.0, 1.0, 1e-12, 64),
            Err(Error::Quadrature(_))
        ));
    }

    #[test]
    fn rejects_bad_tolerance() {
        assert!(adaptive_simpson(&|x| x, 0.0, 1.0, 0.0, 16).is_err());
    }
}
