//! Closed-form graph derivatives of the catenary and sphere pieces and of
//! the glued interpolant, including `λ`-derivatives on the tangent family
//! `R = λ`.

use serde::{Deserialize, Serialize};

use super::Kind;
use crate::error::{Error, Result};
use crate::gluing::GluingProfile;

/// Catenary graph `(u, u', u'')` of scale `1/λ` through `(1, 0)`.
pub fn catenary_graph(lambda: f64, t: f64) -> (f64, f64, f64) {
    let s = lambda * lambda * t * t - 1.0;
    let u = ((lambda * t).acosh() - lambda.acosh()) / lambda;
    (u, 1.0 / s.sqrt(), -lambda * lambda * t / (s * s.sqrt()))
}

/// Lower sphere graph `(v, v', v'')` of radius `R` through `(1, 0)`.
pub fn sphere_graph(radius: f64, t: f64) -> (f64, f64, f64) {
    let q = radius * radius - t * t;
    let v = (radius * radius - 1.0).sqrt() - q.sqrt();
    (v, t / q.sqrt(), radius * radius / (q * q.sqrt()))
}

/// Derivative table for a fixed `λ > 1` with sphere radius `R = λ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivativeTable {
    pub lambda: f64,
}

/// Values of the eight catenary or sphere quantities at one point:
/// `[f, f', f'', f''', ∂λf, ∂λf', ∂λf'', ∂λf''']`.
pub type Row = [f64; 8];

impl DerivativeTable {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda > 1.0 && lambda.is_finite()) {
            return Err(Error::Domain(format!("derivative table needs λ > 1, got {lambda}")));
        }
        Ok(DerivativeTable { lambda })
    }

    fn check(&self, t: f64) -> Result<()> {
        let l = self.lambda;
        if !(t > 1.0 / l) {
            return Err(Error::Domain(format!("t = {t} must exceed 1/λ = {}", 1.0 / l)));
        }
        if !(t < l) {
            return Err(Error::Domain(format!("t = {t} must be below λ = {l}")));
        }
        Ok(())
    }

    /// Catenary quantities `u, …, ∂λu'''`.
    pub fn u(&self, t: f64) -> Result<Row> {
        self.check(t)?;
        let l = self.lambda;
        let (l2, t2) = (l * l, t * t);
        let s = l2 * t2 - 1.0;
        let rs = s.sqrt();
        let ac = (l * t).acosh();
        let a0 = l.acosh();
        Ok([
            (ac - a0) / l,
            1.0 / rs,
            -l2 * t / (s * rs),
            l2 * (2.0 * l2 * t2 + 1.0) / (s * s * rs),
            (a0 - ac + l * t / rs - l / (l2 - 1.0).sqrt()) / l2,
            -l * t2 / (s * rs),
            l * t * (2.0 + l2 * t2) / (s * s * rs),
            -l * (2.0 * l2 * l2 * t2 * t2 + 11.0 * l2 * t2 + 2.0) / (s * s * s * rs),
        ])
    }

    /// Sphere quantities `v, …, ∂λv'''` for the lower branch.
    pub fn v(&self, t: f64) -> Result<Row> {
        self.check(t)?;
        let l = self.lambda;
        let (l2, t2) = (l * l, t * t);
        let q = l2 - t2;
        let rq = q.sqrt();
        Ok([
            (l2 - 1.0).sqrt() - rq,
            t / rq,
            l2 / (q * rq),
            3.0 * l2 * t / (q * q * rq),
            l / (l2 - 1.0).sqrt() - l / rq,
            -l * t / (q * rq),
            -(l2 * l + 2.0 * l * t2) / (q * q * rq),
            -3.0 * l * t * (3.0 * l2 + 2.0 * t2) / (q * q * q * rq),
        ])
    }

    /// Sphere row of the given kind: type α flips the sign of `v`.
    pub fn v_kind(&self, kind: Kind, t: f64) -> Result<Row> {
        let r = self.v(t)?;
        Ok(match kind {
            Kind::Beta => r,
            Kind::Alpha => r.map(|x| -x),
        })
    }

    /// Interpolant `h = u + φ(v − u)` with `[h, h', h'', ∂λh', ∂λh'']`.
    pub fn h(&self, phi: &GluingProfile, kind: Kind, t: f64) -> Result<[f64; 5]> {
        let u = self.u(t)?;
        let v = self.v_kind(kind, t)?;
        let (p, p1, p2) = phi.eval(t);
        let d: [f64; 8] = std::array::from_fn(|k| v[k] - u[k]);
        Ok([
            u[0] + p * d[0],
            u[1] + p * d[1] + p1 * d[0],
            u[2] + p * d[2] + 2.0 * p1 * d[1] + p2 * d[0],
            u[5] + p * d[5] + p1 * d[4],
            u[6] + p * d[6] + 2.0 * p1 * d[5] + p2 * d[4],
        ])
    }
}

/// Largest relative discrepancy of one table entry against its oracle.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EntryCheck {
    pub lambda: f64,
    pub name: String,
    pub max_rel_err: f64,
    pub worst_t: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TableReport {
    pub lambdas: Vec<f64>,
    pub points: usize,
    pub rel_tol: f64,
    pub entries: Vec<EntryCheck>,
    pub max_rel_err: f64,
    pub band_delta: f64,
    /// Largest type-β `∂λh'` over the band samples.
    pub max_dlambda_slope: f64,
    pub passed: bool,
}

const SUFFIX: [&str; 8] = ["", "'", "''", "'''", "", "'", "''", "'''"];

/// Checks every table entry on `points` interior samples of `(1/λ, λ)`.
/// Derivatives are compared with a fourth-order central difference of the
/// entry one level below (in `t` or in `λ`); the base values with the
/// implicit catenary and circle equations. Errors are relative to
/// `max(|exact|, 1e-3 · rms of the entry)` so isolated zeros of an entry
/// do not dominate.
pub fn verify_table(lambdas: &[f64], points: usize, band_delta: f64, rel_tol: f64) -> Result<TableReport> {
    use crate::numerics::fd::central4;
    let mut entries = Vec::new();
    let mut max_slope = f64::NEG_INFINITY;
    for &l in lambdas {
        let tab = DerivativeTable::new(l)?;
        let (a, b) = (1.0 / l, l);
        let ts: Vec<f64> = (0..points).map(|k| a + (b - a) * (k + 1) as f64 / (points + 1) as f64).collect();
        for fam in ["u", "v"] {
            let row = |lam: f64, t: f64| -> Row {
                let tb = DerivativeTable { lambda: lam };
                if fam == "u" {
                    tb.u(t).expect("interior sample")
                } else {
                    tb.v(t).expect("interior sample")
                }
            };
            let mut exact = vec![[0.0; 8]; points];
            let mut approx = vec![[0.0; 8]; points];
            for (i, &t) in ts.iter().enumerate() {
                let dist = (t - a).min(b - t);
                let ht = 1e-3 * dist;
                let hl = 1e-3 * dist.min(l - 1.0) / l;
                let r = row(l, t);
                exact[i] = r;
                // base: residual of the implicit equation, expressed as a
                // height so it shares the relative scale of the entry
                approx[i][0] = if fam == "u" {
                    r[0] + (l * (r[0] + l.acosh() / l)).cosh() / l - t
                } else {
                    let c = (l * l - 1.0).sqrt();
                    r[0] + (t * t + (r[0] - c).powi(2)).sqrt() - l
                };
                for k in 1..4 {
                    approx[i][k] = central4(|x| row(l, x)[k - 1], t, ht);
                }
                for k in 4..8 {
                    approx[i][k] = central4(|m| row(m, t)[k - 4], l, hl);
                }
            }
            for k in 0..8 {
                let rms = (exact.iter().map(|r| r[k] * r[k]).sum::<f64>() / points as f64).sqrt();
                let floor = (1e-3 * rms).max(f64::MIN_POSITIVE);
                let (mut worst, mut worst_t) = (0.0f64, ts[0]);
                for i in 0..points {
                    let e = (approx[i][k] - exact[i][k]).abs() / exact[i][k].abs().max(floor);
                    if e > worst {
                        worst = e;
                        worst_t = ts[i];
                    }
                }
                let prefix = if k >= 4 { "∂λ" } else { "" };
                entries.push(EntryCheck {
                    lambda: l,
                    name: format!("{prefix}{fam}{}", SUFFIX[k]),
                    max_rel_err: worst,
                    worst_t,
                });
            }
        }
        if band_delta < 1.0 - 1.0 / l {
            let phi = GluingProfile::new(band_delta)?;
            for k in 0..=100 {
                let t = 1.0 - band_delta + 2.0 * band_delta * k as f64 / 100.0;
                max_slope = max_slope.max(tab.h(&phi, Kind::Beta, t)?[3]);
            }
        }
    }
    let max_rel_err = entries.iter().map(|e| e.max_rel_err).fold(0.0, f64::max);
    Ok(TableReport {
        lambdas: lambdas.to_vec(),
        points,
        rel_tol,
        entries,
        max_rel_err,
        band_delta,
        max_dlambda_slope: max_slope,
        passed: max_rel_err <= rel_tol && max_slope < 0.0,
    })
}
