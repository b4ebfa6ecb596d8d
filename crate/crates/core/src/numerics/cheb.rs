//! Chebyshev interpolants.

/// Chebyshev series on `[a, b]`.
#[derive(Debug, Clone)]
pub struct Chebyshev {
    a: f64,
    b: f64,
    coeffs: Vec<f64>,
}

impl Chebyshev {
    /// Interpolate `f` at `n` Chebyshev points of the first kind.
    pub fn fit<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> Self {
        let pi = std::f64::consts::PI;
        let vals: Vec<f64> = (0..n)
            .map(|k| {
                let x = ((k as f64 + 0.5) * pi / n as f64).cos();
                f(0.5 * (a + b) + 0.5 * (b - a) * x)
            })
            .collect();
        let coeffs = (0..n)
            .map(|j| {
                let s: f64 = (0..n)
                    .map(|k| vals[k] * (j as f64 * (k as f64 + 0.5) * pi / n as f64).cos())
                    .sum();
                if j == 0 { s / n as f64 } else { 2.0 * s / n as f64 }
            })
            .collect();
        Chebyshev { a, b, coeffs }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let t = (2.0 * x - self.a - self.b) / (self.b - self.a);
        let (mut b1, mut b2) = (0.0, 0.0);
        for &c in self.coeffs.iter().skip(1).rev() {
            let b0 = 2.0 * t * b1 - b2 + c;
            b2 = b1;
            b1 = b0;
        }
        t * b1 - b2 + self.coeffs[0]
    }

    /// Magnitude of the trailing coefficients, a proxy for truncation error.
    pub fn tail(&self) -> f64 {
        self.coeffs.iter().rev().take(3).map(|c| c.abs()).sum()
    }
}

/// Chebyshev interpolants on equal panels.
#[derive(Debug, Clone)]
pub struct PiecewiseChebyshev {
    a: f64,
    b: f64,
    pieces: Vec<Chebyshev>,
}

impl PiecewiseChebyshev {
    pub fn fit<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize, n: usize) -> Self {
        let h = (b - a) / panels as f64;
        let pieces = (0..panels)
            .map(|k| Chebyshev::fit(&f, a + h * k as f64, a + h * (k + 1) as f64, n))
            .collect();
        PiecewiseChebyshev { a, b, pieces }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let p = self.pieces.len();
        let k = (((x - self.a) / (self.b - self.a)) * p as f64).floor();
        let k = (k.max(0.0) as usize).min(p - 1);
        self.pieces[k].eval(x)
    }

    pub fn max_tail(&self) -> f64 {
        self.pieces.iter().map(Chebyshev::tail).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chebyshev_resolves_exp() {
        let c = Chebyshev::fit(f64::exp, -1.0, 2.0, 24);
        for k in 0..50 {
            let x = -1.0 + 3.0 * k as f64 / 49.0;
            assert!((c.eval(x) - x.exp()).abs() < 1e-13);
        }
    }

    #[test]
    fn piecewise_matches_sine() {
        let c = PiecewiseChebyshev::fit(f64::sin, 0.0, 10.0, 8, 20);
        for k in 0..200 {
            let x = 10.0 * k as f64 / 199.0;
            assert!((c.eval(x) - x.sin()).abs() < 1e-13);
        }
    }
}
