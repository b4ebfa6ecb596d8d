//! Quadrature: adaptive Simpson for callables, composite Simpson for samples.

use serde::{Deserialize, Serialize};

/// Integral value with an a-posteriori error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
}

impl Integral {
    pub const ZERO: Integral = Integral { value: 0.0, error: 0.0 };
}

impl std::ops::Add for Integral {
    type Output = Integral;
    fn add(self, o: Integral) -> Integral {
        Integral { value: self.value + o.value, error: self.error + o.error }
    }
}

impl std::iter::Sum for Integral {
    fn sum<I: Iterator<Item = Integral>>(iter: I) -> Integral {
        iter.fold(Integral::ZERO, |a, b| a + b)
    }
}

/// Settings for the adaptive rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadSettings {
    /// Absolute tolerance on the whole interval.
    pub tol: f64,
    pub max_depth: u32,
    /// Panels the interval is split into before adapting.
    pub initial_panels: usize,
}

impl Default for QuadSettings {
    fn default() -> Self {
        QuadSettings { tol: 1e-11, max_depth: 40, initial_panels: 16 }
    }
}

impl QuadSettings {
    pub fn with_tol(tol: f64) -> Self {
        QuadSettings { tol, ..Default::default() }
    }
}

/// Adaptive Simpson with Richardson correction on each accepted panel.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, s: QuadSettings) -> Integral {
    if a == b {
        return Integral::ZERO;
    }
    let n = s.initial_panels.max(1);
    let h = (b - a) / n as f64;
    let mut total = Integral::ZERO;
    let panel_tol = s.tol / n as f64;
    for k in 0..n {
        let x0 = a + h * k as f64;
        let x1 = if k + 1 == n { b } else { a + h * (k + 1) as f64 };
        let xm = 0.5 * (x0 + x1);
        let (f0, fm, f1) = (f(x0), f(xm), f(x1));
        let whole = (x1 - x0) / 6.0 * (f0 + 4.0 * fm + f1);
        total = total + recurse(&f, x0, x1, f0, fm, f1, whole, panel_tol, s.max_depth);
    }
    total
}

#[allow(clippy::too_many_arguments)]
fn recurse<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Integral {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let diff = left + right - whole;
    if depth == 0 || diff.abs() <= 15.0 * tol || (m - a).abs() < 4.0 * f64::EPSILON * m.abs().max(1.0) {
        return Integral { value: left + right + diff / 15.0, error: diff.abs() / 15.0 };
    }
    recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Simpson weights on the grid `x` (nonuniform allowed). An even number of
/// intervals uses panels of two; an odd count closes with a quadratic over the
/// last interval.
pub fn simpson_weights(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut w = vec![0.0; n];
    if n < 2 {
        return w;
    }
    if n == 2 {
        let h = x[1] - x[0];
        w[0] = 0.5 * h;
        w[1] = 0.5 * h;
        return w;
    }
    let intervals = n - 1;
    let paired = intervals - intervals % 2;
    let mut i = 0;
    while i + 2 <= paired {
        let h0 = x[i + 1] - x[i];
        let h1 = x[i + 2] - x[i + 1];
        let s = (h0 + h1) / 6.0;
        w[i] += s * (2.0 - h1 / h0);
        w[i + 1] += s * (h0 + h1) * (h0 + h1) / (h0 * h1);
        w[i + 2] += s * (2.0 - h0 / h1);
        i += 2;
    }
    if intervals % 2 == 1 {
        let k = n - 1;
        let h0 = x[k - 1] - x[k - 2];
        let h1 = x[k] - x[k - 1];
        w[k] += h1 * (2.0 * h1 + 3.0 * h0) / (6.0 * (h0 + h1));
        w[k - 1] += h1 * (h1 + 3.0 * h0) / (6.0 * h0);
        w[k - 2] -= h1 * h1 * h1 / (6.0 * h0 * (h0 + h1));
    }
    w
}

/// Fourth-order end-corrected trapezoid weights on a uniform grid of `n`
/// points with spacing `h`: `h·[3/8, 7/6, 23/24, 1, …, 1, 23/24, 7/6, 3/8]`.
/// Interior weights are constant. Falls back to Simpson below eight points.
pub fn corrected_trapezoid_weights(n: usize, h: f64) -> Vec<f64> {
    if n < 8 {
        let x: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
        return simpson_weights(&x);
    }
    let mut w = vec![h; n];
    for (k, c) in [3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0].into_iter().enumerate() {
        w[k] = c * h;
        w[n - 1 - k] = c * h;
    }
    w
}

/// Trapezoid weights on a nonuniform grid.
pub fn trapezoid_weights(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut w = vec![0.0; n];
    for i in 0..n.saturating_sub(1) {
        let h = x[i + 1] - x[i];
        w[i] += 0.5 * h;
        w[i + 1] += 0.5 * h;
    }
    w
}

/// `true` when consecutive spacings agree to relative `1e-9`.
pub fn is_uniform(x: &[f64]) -> bool {
    if x.len() < 3 {
        return true;
    }
    let h = (x[x.len() - 1] - x[0]) / (x.len() - 1) as f64;
    x.windows(2).all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h.abs())
}

/// Composite Simpson over samples with a Richardson estimate from the
/// every-other-sample subgrid.
pub fn simpson_samples(x: &[f64], y: &[f64]) -> Integral {
    assert_eq!(x.len(), y.len());
    let n = x.len();
    if n < 2 {
        return Integral::ZERO;
    }
    let w = simpson_weights(x);
    let fine: f64 = w.iter().zip(y).map(|(a, b)| a * b).sum();
    if n < 5 {
        return Integral { value: fine, error: f64::NAN };
    }
    let mut idx: Vec<usize> = (0..n).step_by(2).collect();
    if *idx.last().unwrap() != n - 1 {
        idx.push(n - 1);
    }
    let xc: Vec<f64> = idx.iter().map(|&i| x[i]).collect();
    let yc: Vec<f64> = idx.iter().map(|&i| y[i]).collect();
    let wc = simpson_weights(&xc);
    let coarse: f64 = wc.iter().zip(&yc).map(|(a, b)| a * b).sum();
    Integral { value: fine, error: (fine - coarse).abs() / 15.0 }
}

/// Integral of the local cubic interpolant of samples over `[a, b]`, where
/// `a` and `b` may fall between samples. Requires at least four samples.
pub fn partial_integral(x: &[f64], y: &[f64], a: f64, b: f64) -> f64 {
    let n = x.len();
    assert!(n >= 4 && n == y.len());
    if b < a {
        return -partial_integral(x, y, b, a);
    }
    let a = a.max(x[0]);
    let b = b.min(x[n - 1]);
    if b <= a {
        return 0.0;
    }
    let cell = |t: f64| -> usize {
        match x.partition_point(|&v| v <= t) {
            0 => 0,
            k => (k - 1).min(n - 2),
        }
    };
    let (ia, ib) = (cell(a), cell(b));
    let mut total = 0.0;
    for i in ia..=ib {
        let lo = if i == ia { a } else { x[i] };
        let hi = if i == ib { b } else { x[i + 1] };
        if hi > lo {
            total += cubic_segment_integral(x, y, i, lo, hi);
        }
    }
    total
}

fn cubic_segment_integral(x: &[f64], y: &[f64], i: usize, lo: f64, hi: f64) -> f64 {
    let n = x.len();
    let start = i.saturating_sub(1).min(n - 4);
    let xs = &x[start..start + 4];
    let ys = &y[start..start + 4];
    // two-point Gauss is exact for cubics
    let m = 0.5 * (lo + hi);
    let d = 0.5 * (hi - lo) / 3f64.sqrt();
    0.5 * (hi - lo) * (lagrange(xs, ys, m - d) + lagrange(xs, ys, m + d))
}

/// Lagrange interpolation through the given nodes.
pub fn lagrange(xs: &[f64], ys: &[f64], t: f64) -> f64 {
    let mut s = 0.0;
    for j in 0..xs.len() {
        let mut l = 1.0;
        for k in 0..xs.len() {
            if k != j {
                l *= (t - xs[k]) / (xs[j] - xs[k]);
            }
        }
        s += l * ys[j];
    }
    s
}

/// Local cubic interpolation of samples at `t`.
pub fn interp_cubic(x: &[f64], y: &[f64], t: f64) -> f64 {
    let n = x.len();
    if n < 4 {
        let k = x.partition_point(|&v| v <= t).clamp(1, n - 1);
        let (x0, x1) = (x[k - 1], x[k]);
        return y[k - 1] + (y[k] - y[k - 1]) * (t - x0) / (x1 - x0);
    }
    let k = x.partition_point(|&v| v <= t);
    let i = k.saturating_sub(1).min(n - 2);
    let start = i.saturating_sub(1).min(n - 4);
    lagrange(&x[start..start + 4], &y[start..start + 4], t)
}
