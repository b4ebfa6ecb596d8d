//! Finite-difference weights on arbitrary grids.

/// Fornberg's recursion: weights `w[k][j]` for the `k`-th derivative at `x0`
/// from samples at `xs[j]`, for `k = 0..=m`.
pub fn fornberg(x0: f64, xs: &[f64], m: usize) -> Vec<Vec<f64>> {
    let n = xs.len();
    let mut c = vec![vec![0.0; n]; m + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Fourth-order central first derivative.
pub fn central4<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
}

/// Fourth-order central second derivative.
pub fn central4_second<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (-f(x - 2.0 * h) + 16.0 * f(x - h) - 30.0 * f(x) + 16.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h * h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fornberg_reproduces_central_stencil() {
        let w = fornberg(0.0, &[-2.0, -1.0, 0.0, 1.0, 2.0], 2);
        let d1 = [1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0];
        let d2 = [-1.0 / 12.0, 16.0 / 12.0, -30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0];
        for j in 0..5 {
            assert!((w[1][j] - d1[j]).abs() < 1e-14);
            assert!((w[2][j] - d2[j]).abs() < 1e-14);
        }
    }

    #[test]
    fn fornberg_exact_on_quartics_nonuniform() {
        let xs = [0.0, 0.1, 0.35, 0.4, 0.9];
        let f = |x: f64| 1.0 - 2.0 * x + 3.0 * x.powi(3) + x.powi(4);
        let x0 = 0.3;
        let w = fornberg(x0, &xs, 2);
        let d1: f64 = xs.iter().zip(&w[1]).map(|(x, c)| c * f(*x)).sum();
        let d2: f64 = xs.iter().zip(&w[2]).map(|(x, c)| c * f(*x)).sum();
        assert!((d1 - (-2.0 + 9.0 * x0 * x0 + 4.0 * x0.powi(3))).abs() < 1e-11);
        assert!((d2 - (18.0 * x0 + 12.0 * x0 * x0)).abs() < 1e-10);
    }
}
