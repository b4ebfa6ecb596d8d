//! Generating curves of surfaces of revolution.

pub mod energy;
pub mod io;
pub mod lift;
pub mod multiplicity;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::quad::simpson_samples;
use crate::numerics::Integral;
use energy::{density, Stencils};

pub use lift::TangentLift;
pub use multiplicity::tuple_point_multiplicity;

/// Exact derivatives of a sample with respect to the curve parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Jet {
    pub dr: f64,
    pub dh: f64,
    pub ddr: f64,
    pub ddh: f64,
}

/// Default slope tolerance for perpendicular axis contact.
pub const AXIS_SLOPE_TOL: f64 = 1e-2;

/// Sampled profile `(r, h)` over a strictly increasing parameter `s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileCurve {
    pub s: Vec<f64>,
    pub r: Vec<f64>,
    pub h: Vec<f64>,
    /// Whether the start / end sample lies on the axis `r = 0`.
    pub closed_on_axis: (bool, bool),
    /// Interior sample indices where the curve is only C¹; difference
    /// stencils and quadrature do not cross them.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub breaks: Vec<usize>,
    /// Exact derivatives, if the curve was sampled from closed forms.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jets: Option<Vec<Jet>>,
    /// Jets of the piece that starts at each break, when `jets` holds the
    /// values of the piece ending there.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub break_jets: Vec<Jet>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub meta: BTreeMap<String, String>,
}

/// Energy of a sampled profile.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProfileEnergy {
    pub total: Integral,
    /// Energy per smooth piece (between breaks).
    pub pieces: Vec<Integral>,
    #[serde(skip)]
    pub density: Vec<f64>,
}

impl ProfileCurve {
    /// Build and validate a curve. Axis flags are taken from the caller; the
    /// radius at a flagged end is snapped to exactly zero.
    pub fn new(s: Vec<f64>, r: Vec<f64>, h: Vec<f64>, closed_on_axis: (bool, bool)) -> Result<Self> {
        let mut c = ProfileCurve {
            s,
            r,
            h,
            closed_on_axis,
            breaks: Vec::new(),
            jets: None,
            break_jets: Vec::new(),
            meta: BTreeMap::new(),
        };
        c.validate()?;
        Ok(c)
    }

    /// Build a curve and infer the axis flags from the end radii.
    pub fn detect(s: Vec<f64>, r: Vec<f64>, h: Vec<f64>) -> Result<Self> {
        let scale = diameter_of(&r, &h).max(1e-300);
        let flags = (
            r.first().is_some_and(|v| v.abs() <= 1e-12 * scale),
            r.last().is_some_and(|v| v.abs() <= 1e-12 * scale),
        );
        Self::new(s, r, h, flags)
    }

    /// Sample `f(s) = (r, h)` on `n` equally spaced parameters.
    pub fn from_fn<F: Fn(f64) -> (f64, f64)>(n: usize, s0: f64, s1: f64, axis: (bool, bool), f: F) -> Result<Self> {
        let s: Vec<f64> = (0..n).map(|i| s0 + (s1 - s0) * i as f64 / (n - 1) as f64).collect();
        let (r, h): (Vec<f64>, Vec<f64>) = s.iter().map(|&t| f(t)).unzip();
        Self::new(s, r, h, axis)
    }

    pub fn with_jets(mut self, jets: Vec<Jet>) -> Result<Self> {
        if jets.len() != self.len() {
            return Err(Error::Parameter("jet count differs from sample count".into()));
        }
        self.jets = Some(jets);
        Ok(self)
    }

    pub fn with_breaks(mut self, mut breaks: Vec<usize>) -> Result<Self> {
        breaks.sort_unstable();
        breaks.dedup();
        breaks.retain(|&b| b > 0 && b + 1 < self.len());
        self.breaks = breaks;
        self.break_jets.clear();
        self.validate()?;
        Ok(self)
    }

    /// One-sided jets of the following piece, one per break.
    pub fn with_break_jets(mut self, jets: Vec<Jet>) -> Result<Self> {
        if self.jets.is_none() || jets.len() != self.breaks.len() {
            return Err(Error::Parameter("break jets need node jets and one entry per break".into()));
        }
        self.break_jets = jets;
        Ok(self)
    }

    pub fn with_meta(mut self, key: &str, value: impl Into<String>) -> Self {
        self.meta.insert(key.to_string(), value.into());
        self
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    fn validate(&mut self) -> Result<()> {
        let n = self.s.len();
        if self.r.len() != n || self.h.len() != n {
            return Err(Error::Parameter("s, r, h must have equal length".into()));
        }
        if n < 5 {
            return Err(Error::Parameter(format!("a profile needs at least 5 samples, got {n}")));
        }
        if let Some(i) = (0..n).find(|&i| !(self.s[i].is_finite() && self.r[i].is_finite() && self.h[i].is_finite())) {
            return Err(Error::Parameter(format!("non-finite sample at index {i}")));
        }
        if let Some(i) = (1..n).find(|&i| self.s[i] <= self.s[i - 1]) {
            return Err(Error::Parameter(format!("parameter not strictly increasing at index {i}")));
        }
        for i in 1..n {
            if self.r[i] == self.r[i - 1] && self.h[i] == self.h[i - 1] {
                return Err(Error::NotRegular { index: i });
            }
        }
        let scale = diameter_of(&self.r, &self.h);
        let snap = 1e-12 * scale;
        for (flag, idx) in [(self.closed_on_axis.0, 0), (self.closed_on_axis.1, n - 1)] {
            if flag {
                if self.r[idx].abs() > snap.max(1e-14) {
                    return Err(Error::Parameter(format!("sample {idx} is flagged on the axis but has r = {}", self.r[idx])));
                }
                self.r[idx] = 0.0;
            }
        }
        if let Some(i) = (0..n).find(|&i| self.r[i] < 0.0) {
            return Err(Error::Parameter(format!("negative radius at sample {i}")));
        }
        let closed = self.closed_on_axis.0 || self.closed_on_axis.1;
        if closed {
            if let Some(i) = (1..n - 1).find(|&i| self.r[i] <= 0.0) {
                return Err(Error::AxisContact { index: i });
            }
        }
        Ok(())
    }

    /// Check that flagged axis ends meet the axis perpendicularly, using
    /// one-sided three-point differences.
    pub fn check_axis_contact(&self, tol: f64) -> Result<()> {
        let n = self.len();
        let one_sided = |idx: [usize; 3]| {
            let xs = [self.s[idx[0]], self.s[idx[1]], self.s[idx[2]]];
            let w = crate::numerics::fd::fornberg(xs[0], &xs, 1);
            let dr: f64 = (0..3).map(|k| w[1][k] * self.r[idx[k]]).sum();
            let dh: f64 = (0..3).map(|k| w[1][k] * self.h[idx[k]]).sum();
            dh.abs() / dr.abs()
        };
        if self.closed_on_axis.0 {
            let ratio = one_sided([0, 1, 2]);
            if !(ratio <= tol) {
                return Err(Error::NotPerpendicular { end: "start", ratio });
            }
        }
        if self.closed_on_axis.1 {
            let ratio = one_sided([n - 1, n - 2, n - 3]);
            if !(ratio <= tol) {
                return Err(Error::NotPerpendicular { end: "end", ratio });
            }
        }
        Ok(())
    }

    pub fn diameter(&self) -> f64 {
        diameter_of(&self.r, &self.h)
    }

    /// Derivatives `(r', h', r'', h'')` at every sample: exact jets when
    /// present, otherwise five-point differences. Break samples receive the
    /// values of the piece that ends there; use [`Self::piece_derivs`] for
    /// both sides.
    pub fn derivs(&self) -> Vec<[f64; 4]> {
        let mut out = vec![[0.0; 4]; self.len()];
        for (_, lo, hi, d) in self.piece_derivs() {
            out[lo..=hi].copy_from_slice(&d);
        }
        out
    }

    /// Per smooth piece: `(piece index, lo, hi, derivatives on lo..=hi)`.
    pub fn piece_derivs(&self) -> Vec<(usize, usize, usize, Vec<[f64; 4]>)> {
        if let Some(j) = &self.jets {
            let mut bounds = vec![0];
            bounds.extend(self.breaks.iter().copied());
            bounds.push(self.len() - 1);
            let row = |q: &Jet| [q.dr, q.dh, q.ddr, q.ddh];
            return bounds
                .windows(2)
                .enumerate()
                .map(|(p, w)| {
                    let mut d: Vec<[f64; 4]> = j[w[0]..=w[1]].iter().map(row).collect();
                    if p > 0 {
                        if let Some(q) = self.break_jets.get(p - 1) {
                            d[0] = row(q);
                        }
                    }
                    (p, w[0], w[1], d)
                })
                .collect();
        }
        let st = Stencils::build(&self.s, self.closed_on_axis, &self.breaks);
        st.pieces
            .iter()
            .enumerate()
            .map(|(p, ps)| (p, ps.lo, ps.hi, (ps.lo..=ps.hi).map(|i| ps.derivs(i, &self.r, &self.h)).collect()))
            .collect()
    }

    /// Willmore energy `W = (π/2) ∫ r |c'| (κ₁ + κ₂)² ds` by composite
    /// Simpson per smooth piece.
    pub fn willmore_energy(&self) -> Result<ProfileEnergy> {
        let n = self.len();
        let mut density_all = vec![0.0; n];
        let mut pieces = Vec::new();
        for (_, lo, hi, d) in self.piece_derivs() {
            let mut f = Vec::with_capacity(hi - lo + 1);
            for (k, dv) in d.iter().enumerate() {
                let i = lo + k;
                let speed = dv[0].hypot(dv[1]);
                if !(speed > 0.0) || !speed.is_finite() {
                    return Err(Error::NotRegular { index: i });
                }
                let on_axis = (i == 0 && self.closed_on_axis.0) || (i == n - 1 && self.closed_on_axis.1);
                if self.r[i] <= 0.0 && !on_axis {
                    return Err(Error::AxisContact { index: i });
                }
                f.push(if on_axis { 0.0 } else { density(self.r[i], dv[0], dv[1], dv[2], dv[3]) });
            }
            density_all[lo..=hi].copy_from_slice(&f);
            pieces.push(simpson_samples(&self.s[lo..=hi], &f));
        }
        let total = pieces.iter().copied().sum();
        Ok(ProfileEnergy { total, pieces, density: density_all })
    }

    /// Same curve traversed backwards.
    pub fn reversed(&self) -> ProfileCurve {
        let n = self.len();
        let s_end = self.s[n - 1];
        let s0 = self.s[0];
        let s: Vec<f64> = self.s.iter().rev().map(|v| s_end + s0 - v).collect();
        let r: Vec<f64> = self.r.iter().rev().copied().collect();
        let h: Vec<f64> = self.h.iter().rev().copied().collect();
        let flip = |q: &Jet| Jet { dr: -q.dr, dh: -q.dh, ddr: q.ddr, ddh: q.ddh };
        let mut jets: Option<Vec<Jet>> = self.jets.as_ref().map(|j| j.iter().rev().map(flip).collect());
        // sides swap at the breaks
        let mut break_jets = Vec::new();
        if let Some(j) = jets.as_mut() {
            for (k, &b) in self.breaks.iter().enumerate().rev() {
                if let Some(after) = self.break_jets.get(k) {
                    j[n - 1 - b] = flip(after);
                    break_jets.push(flip(&self.jets.as_ref().expect("jets present")[b]));
                }
            }
        }
        let breaks: Vec<usize> = self.breaks.iter().rev().map(|b| n - 1 - b).collect();
        ProfileCurve {
            s,
            r,
            h,
            closed_on_axis: (self.closed_on_axis.1, self.closed_on_axis.0),
            breaks,
            jets,
            break_jets,
            meta: self.meta.clone(),
        }
    }

    /// Image under the dilation `x ↦ σx`; the parameter is scaled too.
    pub fn scaled(&self, sigma: f64) -> ProfileCurve {
        let mut c = self.clone();
        c.s.iter_mut().for_each(|v| *v *= sigma);
        c.r.iter_mut().for_each(|v| *v *= sigma);
        c.h.iter_mut().for_each(|v| *v *= sigma);
        if let Some(j) = c.jets.as_mut() {
            for q in j.iter_mut().chain(c.break_jets.iter_mut()) {
                q.ddr /= sigma;
                q.ddh /= sigma;
            }
        }
        c
    }

    /// Vertical translation.
    pub fn shifted(&self, dh: f64) -> ProfileCurve {
        let mut c = self.clone();
        c.h.iter_mut().for_each(|v| *v += dh);
        c
    }

    /// Drop exact derivatives so that energies use differences only.
    pub fn without_jets(&self) -> ProfileCurve {
        let mut c = self.clone();
        c.jets = None;
        c.break_jets.clear();
        c
    }
}

pub(crate) fn diameter_of(r: &[f64], h: &[f64]) -> f64 {
    let span = |v: &[f64]| {
        let (lo, hi) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
        hi - lo
    };
    // the rotated surface spans 2 r_max horizontally
    let rmax = r.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
    (2.0 * rmax).hypot(span(h)).max(span(r))
}

/// Li–Yau check report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LiYauReport {
    pub multiplicity: usize,
    pub energy: f64,
    pub energy_error: f64,
    pub bound: f64,
    pub margin: f64,
    pub satisfied: bool,
}

/// Relative slack added to the quadrature estimate in the Li–Yau check.
pub const LIYAU_REL_SLACK: f64 = 1e-6;

/// Compare `W` with `4πn` where `n` is the profile point multiplicity.
pub fn liyau_check(curve: &ProfileCurve) -> Result<LiYauReport> {
    let e = curve.willmore_energy()?;
    let n = tuple_point_multiplicity(curve, multiplicity::default_tol(curve));
    let bound = 4.0 * std::f64::consts::PI * n as f64;
    let tol = e.total.error.max(0.0) + LIYAU_REL_SLACK * bound;
    Ok(LiYauReport {
        multiplicity: n,
        energy: e.total.value,
        energy_error: e.total.error,
        bound,
        margin: e.total.value - bound,
        satisfied: e.total.value >= bound - tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    pub(crate) fn sphere(n: usize) -> ProfileCurve {
        ProfileCurve::from_fn(n, 0.0, PI, (true, true), |s| (s.sin(), -s.cos())).unwrap()
    }

    #[test]
    fn round_sphere_energy() {
        let e = sphere(2049).willmore_energy().unwrap();
        assert!((e.total.value / (4.0 * PI) - 1.0).abs() < 1e-10, "{}", e.total.value);
    }

    #[test]
    fn sphere_energy_converges_at_fourth_order() {
        let err = |n| (sphere(n).willmore_energy().unwrap().total.value - 4.0 * PI).abs();
        let (a, b) = (err(65), err(129));
        assert!(a / b > 14.0, "ratio {}", a / b);
    }

    #[test]
    fn catenary_band_is_minimal() {
        let lam: f64 = 2.0;
        let t0 = lam.acosh() / lam;
        let c = ProfileCurve::from_fn(1025, -t0, t0, (false, false), |t| ((lam * t).cosh() / lam, t)).unwrap();
        let e = c.willmore_energy().unwrap();
        assert!(e.total.value.abs() < 1e-9, "{}", e.total.value);
    }

    #[test]
    fn scale_and_reversal_invariance() {
        let c = ProfileCurve::from_fn(801, 0.0, PI, (true, true), |s| {
            let rho = 1.0 + 0.1 * (2.0 * s).cos();
            (rho * s.sin(), -rho * s.cos())
        })
        .unwrap();
        let w = c.willmore_energy().unwrap().total.value;
        let w2 = c.scaled(3.7).willmore_energy().unwrap().total.value;
        let w3 = c.reversed().willmore_energy().unwrap().total.value;
        assert!((w - w2).abs() < 1e-10 * w, "{w} {w2}");
        assert!((w - w3).abs() < 1e-10 * w, "{w} {w3}");
        assert!(w > 4.0 * PI);
    }

    #[test]
    fn rejects_repeated_and_axis_touching_samples() {
        let s = vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0];
        let r = vec![1.0, 1.0, 1.0, 2.0, 2.0, 3.0];
        let h = vec![0.0, 0.0, 1.0, 1.0, 2.0, 2.0];
        assert_eq!(ProfileCurve::new(s.clone(), r, h.clone(), (false, false)).unwrap_err(), Error::NotRegular { index: 1 });
        let r = vec![0.0, 1.0, 0.0, 2.0, 1.0, 0.0];
        assert_eq!(ProfileCurve::new(s, r, h, (true, true)).unwrap_err(), Error::AxisContact { index: 2 });
    }

    #[test]
    fn perpendicular_contact_is_checked() {
        sphere(257).check_axis_contact(AXIS_SLOPE_TOL).unwrap();
        let tilted = ProfileCurve::from_fn(257, 0.0, 1.0, (true, false), |s| (s, 0.5 * s)).unwrap();
        assert!(matches!(tilted.check_axis_contact(AXIS_SLOPE_TOL), Err(Error::NotPerpendicular { .. })));
    }

    #[test]
    fn liyau_on_sphere() {
        let rep = liyau_check(&sphere(1025)).unwrap();
        assert_eq!(rep.multiplicity, 1);
        assert!(rep.satisfied);
    }
}
