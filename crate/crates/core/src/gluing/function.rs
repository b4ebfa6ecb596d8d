//! Smooth cutoff built from the standard mollifier.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::cheb::PiecewiseChebyshev;
use crate::numerics::{adaptive_simpson, QuadSettings};

/// Points used when measuring the realized derivative constant.
pub const M_GRID_POINTS: usize = 100_000;

fn raw_bump(y: f64) -> f64 {
    if y.abs() >= 1.0 {
        0.0
    } else {
        (1.0 / (y * y - 1.0)).exp()
    }
}

struct BumpTable {
    norm: f64,
    half: PiecewiseChebyshev,
}

fn table() -> &'static BumpTable {
    static T: OnceLock<BumpTable> = OnceLock::new();
    T.get_or_init(|| {
        let q = QuadSettings { tol: 1e-17, max_depth: 50, initial_panels: 64 };
        let norm = 2.0 * adaptive_simpson(raw_bump, -1.0, 0.0, q).value;
        let prim = |y: f64| adaptive_simpson(raw_bump, -1.0, y, q).value / norm;
        let half = PiecewiseChebyshev::fit(prim, -1.0, 0.0, 32, 24);
        BumpTable { norm, half }
    })
}

/// Normalizing constant of the mollifier, the integral of `exp(1/(y²-1))` over `(-1, 1)`.
pub fn mollifier_norm() -> f64 {
    table().norm
}

/// Normalized bump `f(y)`.
pub fn bump(y: f64) -> f64 {
    raw_bump(y) / table().norm
}

/// `f'(y)`.
pub fn bump_d1(y: f64) -> f64 {
    if y.abs() >= 1.0 {
        return 0.0;
    }
    let d = y * y - 1.0;
    bump(y) * (-2.0 * y) / (d * d)
}

/// `f''(y)`.
pub fn bump_d2(y: f64) -> f64 {
    if y.abs() >= 1.0 {
        return 0.0;
    }
    let d = y * y - 1.0;
    let q = -2.0 * y / (d * d);
    let dq = -2.0 / (d * d) + 8.0 * y * y / (d * d * d);
    bump(y) * (q * q + dq)
}

/// `g(y)`, the antiderivative of the bump with `g(-1) = 0`, `g(1) = 1`.
pub fn step(y: f64) -> f64 {
    if y <= -1.0 {
        0.0
    } else if y >= 1.0 {
        1.0
    } else if y <= 0.0 {
        table().half.eval(y).clamp(0.0, 0.5)
    } else {
        1.0 - table().half.eval(-y).clamp(0.0, 0.5)
    }
}

/// The cutoff `φ(x) = g((x - center)/δ)` with analytic first and second derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GluingProfile {
    pub delta: f64,
    pub center: f64,
    /// Realized `max(δ|φ'|, δ²|φ''|)` on a dense grid.
    pub m: f64,
}

impl GluingProfile {
    /// Cutoff on the unit-centered band `[1-δ, 1+δ]`.
    pub fn new(delta: f64) -> Result<Self> {
        Self::centered(delta, 1.0)
    }

    /// Cutoff on `[center-δ, center+δ]`.
    pub fn centered(delta: f64, center: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::Parameter(format!("gluing half-width must lie in (0,1), got {delta}")));
        }
        if !(center > delta) {
            return Err(Error::Parameter(format!("band center {center} must exceed the half-width {delta}")));
        }
        let mut p = GluingProfile { delta, center, m: 0.0 };
        p.m = p.realized_m(M_GRID_POINTS);
        Ok(p)
    }

    fn realized_m(&self, n: usize) -> f64 {
        let (lo, hi) = (self.center - self.delta, self.center + self.delta);
        (0..n)
            .map(|k| {
                let x = lo + (hi - lo) * k as f64 / (n - 1) as f64;
                let (_, d1, d2) = self.eval(x);
                (self.delta * d1.abs()).max(self.delta * self.delta * d2.abs())
            })
            .fold(0.0, f64::max)
    }

    #[inline]
    fn y(&self, x: f64) -> f64 {
        (x - self.center) / self.delta
    }

    pub fn phi(&self, x: f64) -> f64 {
        if x <= self.inner() {
            0.0
        } else if x >= self.outer() {
            1.0
        } else {
            step(self.y(x))
        }
    }

    /// `(φ, φ', φ'')` at `x`.
    pub fn eval(&self, x: f64) -> (f64, f64, f64) {
        let y = self.y(x);
        let d = self.delta;
        (self.phi(x), bump(y) / d, bump_d1(y) / (d * d))
    }

    pub fn inner(&self) -> f64 {
        self.center - self.delta
    }

    pub fn outer(&self) -> f64 {
        self.center + self.delta
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoints_and_midpoint() {
        let p = GluingProfile::new(0.1).unwrap();
        assert_eq!(p.phi(0.9), 0.0);
        assert_eq!(p.phi(1.1), 1.0);
        assert!((p.phi(1.0) - 0.5).abs() < 1e-15);
        assert!(p.phi(0.95) > 0.0 && p.phi(0.95) < 0.5);
    }

    #[test]
    fn monotone_and_bounded() {
        let p = GluingProfile::new(0.3).unwrap();
        let mut prev = 0.0;
        for k in 0..=4000 {
            let x = 0.6 + 0.8 * k as f64 / 4000.0;
            let v = p.phi(x);
            assert!(v >= prev - 1e-15 && (0.0..=1.0).contains(&v));
            prev = v;
        }
    }

    #[test]
    fn step_derivative_matches_bump() {
        for k in 1..40 {
            let y = -0.975 + 1.95 * k as f64 / 40.0;
            let fd = crate::numerics::fd::central4(step, y, 1e-3);
            assert!((fd - bump(y)).abs() < 1e-9, "y={y}");
            let fd2 = crate::numerics::fd::central4(bump, y, 1e-3);
            assert!((fd2 - bump_d1(y)).abs() < 1e-7 * (1.0 + bump_d1(y).abs()));
            let fd3 = crate::numerics::fd::central4(bump_d1, y, 1e-3);
            assert!((fd3 - bump_d2(y)).abs() < 1e-6 * (1.0 + bump_d2(y).abs()));
        }
    }

    #[test]
    fn rejects_bad_delta() {
        assert!(GluingProfile::new(0.0).is_err());
        assert!(GluingProfile::new(1.0).is_err());
        assert!(GluingProfile::new(f64::NAN).is_err());
    }
}
