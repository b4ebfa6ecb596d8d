//! Continuous lift of the tangent angle and the turning number.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::ProfileCurve;
use crate::error::{Error, Result};

/// Largest tangent-angle change accepted between neighbouring samples.
pub const MAX_ANGLE_STEP: f64 = 0.5 * PI;

/// Tangent angle lift `ϑ(s_i)`. Angles are measured counterclockwise from
/// the `r` direction in the `(r, h)` half-plane.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TangentLift {
    pub s: Vec<f64>,
    pub theta: Vec<f64>,
    /// `(ϑ(end) − ϑ(start)) / 2π`.
    pub tau: f64,
}

impl TangentLift {
    pub fn compute(curve: &ProfileCurve) -> Result<TangentLift> {
        Self::compute_with(curve, MAX_ANGLE_STEP)
    }

    pub fn compute_with(curve: &ProfileCurve, max_step: f64) -> Result<TangentLift> {
        let d = curve.derivs();
        let raw: Vec<f64> = d.iter().map(|q| q[1].atan2(q[0])).collect();
        let mut theta = Vec::with_capacity(raw.len());
        theta.push(raw[0]);
        for i in 1..raw.len() {
            let mut delta = raw[i] - raw[i - 1];
            delta -= 2.0 * PI * (delta / (2.0 * PI)).round();
            if delta.abs() >= max_step {
                return Err(Error::RefinementRequired { index: i - 1, jump: delta.abs() });
            }
            theta.push(theta[i - 1] + delta);
        }
        let tau = (theta[theta.len() - 1] - theta[0]) / (2.0 * PI);
        Ok(TangentLift { s: curve.s.clone(), theta, tau })
    }

    /// `τ` rounded to the nearest half-integer.
    pub fn tau_half_integer(&self) -> f64 {
        (2.0 * self.tau).round() / 2.0
    }

    /// Smallest parameter at which the lift (linearly interpolated and then
    /// refined by bisection on the cubic interpolant) reaches `level`.
    pub fn first_crossing(&self, level: f64) -> Option<f64> {
        let n = self.theta.len();
        let start = self.theta[0];
        if start == level {
            return Some(self.s[0]);
        }
        let above = start > level;
        let i = (1..n).find(|&i| (self.theta[i] >= level) != above || self.theta[i] == level)?;
        let f = |t: f64| crate::numerics::quad::interp_cubic(&self.s, &self.theta, t) - level;
        let (mut a, mut b) = (self.s[i - 1], self.s[i]);
        let (mut fa, fb) = (f(a), f(b));
        if fa * fb > 0.0 {
            // interpolant disagrees with the samples; fall back to the chord
            let t = (level - self.theta[i - 1]) / (self.theta[i] - self.theta[i - 1]);
            return Some(a + t * (b - a));
        }
        for _ in 0..100 {
            let m = 0.5 * (a + b);
            let fm = f(m);
            if fm == 0.0 {
                return Some(m);
            }
            if (fm > 0.0) == (fa > 0.0) {
                a = m;
                fa = fm;
            } else {
                b = m;
            }
            if b - a <= 1e-15 * b.abs().max(1.0) {
                break;
            }
        }
        Some(0.5 * (a + b))
    }
}
