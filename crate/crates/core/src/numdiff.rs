//! Finite-difference derivative oracles.
//!
//! Central differences with one step of Richardson extrapolation are the
//! default derivative oracle wherever an analytic gradient is not supplied.

/// Default step for first-derivative central differences.
pub const DEFAULT_STEP: f64 = 1e-5;

/// First derivative of a scalar function of one variable, central difference
/// with Richardson refinement: combines steps h and h/2 to cancel the h^2
/// term.
pub fn derivative<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    let d = |h: f64| (f(x + h) - f(x - h)) / (2.0 * h);
    let coarse = d(h);
    let fine = d(h / 2.0);
    (4.0 * fine - coarse) / 3.0
}

/// Second derivative by the symmetric three-point stencil with Richardson
/// refinement.
pub fn second_derivative<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    let d = |h: f64| (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
    let coarse = d(h);
    let fine = d(h / 2.0);
    (4.0 * fine - coarse) / 3.0
}

/// Gradient of a scalar function of several variables.
pub fn gradient<F: Fn(&[f64]) -> f64>(f: F, x: &[f64], h: f64) -> Vec<f64> {
    (0..x.len())
        .map(|k| {
            let fk = |t: f64| {
                let mut probe = x.to_vec();
                probe[k] = t;
                f(&probe)
            };
            derivative(fk, x[k], h)
        })
        .collect()
}

/// Jacobian of a vector-valued function, column by column.
///
/// Entry (r, c) is the derivative of output r with respect to input c; rows
/// are returned as `out[r][c]`.
pub fn jacobian<F: Fn(&[f64]) -> Vec<f64>>(f: F, x: &[f64], h: f64) -> Vec<Vec<f64>> {
    let out_dim = f(x).len();
    let mut jac = vec![vec![0.0; x.len()]; out_dim];
    for c in 0..x.len() {
        let col = |t: f64| {
            let mut probe = x.to_vec();
            probe[c] = t;
            f(&probe)
        };
        let diff = |h: f64| -> Vec<f64> {
            let plus = col(x[c] + h);
            let minus = col(x[c] - h);
            plus.iter()
                .zip(&minus)
                .map(|(p, m)| (p - m) / (2.0 * h))
                .collect()
        };
        let coarse = diff(h);
        let fine = diff(h / 2.0);
        for r in 0..out_dim {
            jac[r][c] = (4.0 * fine[r] - coarse[r]) / 3.0;
        }
    }
    jac
}

/// Central divided difference of order `order` (1..=4) with step `h`,
/// normalized by h^order. Symmetric binomial stencil; estimates the
/// order-th derivative at `x` with O(h^2) truncation error.
pub fn central_divided_difference<F: Fn(f64) -> f64>(f: F, x: f64, order: usize, h: f64) -> f64 {
    assert!((1..=4).contains(&order), "order must be in 1..=4");
    let mut acc = 0.0;
    let mut sign = 1.0;
    for i in 0..=order {
        let node = x + (order as f64 / 2.0 - i as f64) * h;
        acc += sign * binomial(order, i) * f(node);
        sign = -sign;
    }
    acc / h.powi(order as i32)
}

fn binomial(n: usize, k: usize) -> f64 {
    let mut v = 1.0;
    for i in 0..k {
        v = v * (n - i) as f64 / (i + 1) as f64;
    }
    v
}

/// Newton divided difference f[x0, .., xn] over arbitrary (typically
/// geometric) nodes; order is one less than the number of samples. Bounded
/// divided differences at nodes accumulating at a point are the discrete
/// certificate of smoothness there.
pub fn newton_divided_difference(samples: &[(f64, f64)]) -> f64 {
    let mut table: Vec<f64> = samples.iter().map(|(_, y)| *y).collect();
    let xs: Vec<f64> = samples.iter().map(|(x, _)| *x).collect();
    for level in 1..samples.len() {
        for i in 0..samples.len() - level {
            table[i] = (table[i] - table[i + 1]) / (xs[i] - xs[i + level]);
        }
    }
    table[0]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivative_of_sine_is_cosine() {
        let d = derivative(f64::sin, 0.7, DEFAULT_STEP);
        assert!((d - 0.7_f64.cos()).abs() < 1e-11);
    }

    #[test]
    fn second_derivative_of_sine() {
        let d = second_derivative(f64::sin, 0.3, 1e-4);
        assert!((d + 0.3_f64.sin()).abs() < 1e-7);
    }

    #[test]
    fn gradient_of_quadratic() {
        let f = |x: &[f64]| x[0] * x[0] + 3.0 * x[1];
        let g = gradient(f, &[2.0, 5.0], DEFAULT_STEP);
        assert!((g[0] - 4.0).abs() < 1e-9);
        assert!((g[1] - 3.0).abs() < 1e-9);
    }

    #[test]
    fn jacobian_of_linear_map() {
        let f = |x: &[f64]| vec![2.0 * x[0] + x[1], -x[0]];
        let j = jacobian(f, &[1.0, 1.0], 1e-4);
        assert!((j[0][0] - 2.0).abs() < 1e-9);
        assert!((j[0][1] - 1.0).abs() < 1e-9);
        assert!((j[1][0] + 1.0).abs() < 1e-9);
        assert!(j[1][1].abs() < 1e-9);
    }

    #[test]
    fn fourth_difference_annihilates_cubic() {
        let f = |x: f64| x * x * x - 2.0 * x;
        let d = central_divided_difference(f, 0.4, 4, 1e-2);
        assert!(d.abs() < 1e-5);
    }

    #[test]
    fn third_difference_of_cubic_is_six() {
        let f = |x: f64| x * x * x;
        let d = central_divided_difference(f, 0.0, 3, 1e-3);
        assert!((d - 6.0).abs() < 1e-6);
    }

    #[test]
    fn newton_difference_reads_off_taylor_coefficients() {
        // f[x0..x3] of a cubic equals the leading coefficient.
        let f = |x: f64| 2.0 * x * x * x + x - 5.0;
        let nodes = [0.5, 0.25, 0.125, 0.0625];
        let samples: Vec<(f64, f64)> = nodes.iter().map(|&x| (x, f(x))).collect();
        assert!((newton_divided_difference(&samples) - 2.0).abs() < 1e-10);
    }
}
