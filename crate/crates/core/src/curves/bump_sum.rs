//! A locally cylindrical function that is not cylindrical.
//!
//! On the space of real sequences, summing h(x_0 - n) x_n over n with a bump
//! h supported in [-1/2, 1/2] gives a smooth function: near any point only
//! finitely many terms are active, and which coordinates matter depends on
//! where x_0 sits, so no single level sees the whole function.

/// The standard bump: exp(1 - 1/(1 - 4 s^2)) inside |s| < 1/2, zero
/// outside; value 1 at the origin.
pub fn standard_bump(s: f64) -> f64 {
    if s.abs() >= 0.5 {
        return 0.0;
    }
    (1.0 - 1.0 / (1.0 - 4.0 * s * s)).exp()
}

/// f(x) = sum_n h(x_0 - n) x_n over the provided prefix of a finite-support
/// sequence (coordinates beyond the slice are zero). Only indices n with
/// |x_0 - n| < 1/2 contribute.
pub fn bump_sum_eval(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    let x0 = x[0];
    x.iter()
        .enumerate()
        .map(|(n, xn)| standard_bump(x0 - n as f64) * xn)
        .sum()
}
