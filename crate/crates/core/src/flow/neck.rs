//! Neck location and blow-up comparison with the unit catenary.

use serde::{Deserialize, Serialize};

use crate::profile::ProfileCurve;

/// Residual above which a rescaled window is not treated as a neck.
pub const NOT_A_NECK: f64 = 0.5;

/// Smallest radius away from the axis ends, refined by a parabola through
/// the neighbouring samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeckLocation {
    pub index: usize,
    pub r_min: f64,
    pub s: f64,
    pub h: f64,
    /// `true` when the minimum is an interior local minimum of `r`.
    pub local_min: bool,
}

pub fn locate_neck(curve: &ProfileCurve) -> NeckLocation {
    let n = curve.len();
    let r = &curve.r;
    let lo = if curve.closed_on_axis.0 { 1 } else { 0 };
    let hi = if curve.closed_on_axis.1 { n - 2 } else { n - 1 };
    let mut best: Option<usize> = None;
    for i in lo.max(1)..=hi.min(n - 2) {
        if r[i] <= r[i - 1] && r[i] <= r[i + 1] && best.is_none_or(|b| r[i] < r[b]) {
            best = Some(i);
        }
    }
    let local_min = best.is_some();
    let i = best.unwrap_or_else(|| (lo..=hi).min_by(|&a, &b| r[a].total_cmp(&r[b])).expect("nonempty range"));
    if !local_min || i == 0 || i + 1 >= n {
        return NeckLocation { index: i, r_min: r[i], s: curve.s[i], h: curve.h[i], local_min };
    }
    // parabolic vertex in the parameter
    let (s0, s1, s2) = (curve.s[i - 1], curve.s[i], curve.s[i + 1]);
    let (r0, r1, r2) = (r[i - 1], r[i], r[i + 1]);
    let d01 = (r1 - r0) / (s1 - s0);
    let d12 = (r2 - r1) / (s2 - s1);
    let c2 = (d12 - d01) / (s2 - s0);
    let (s_star, r_star) = if c2 > 0.0 {
        let b = d01 - c2 * (s0 + s1);
        let ss = (-b / (2.0 * c2)).clamp(s0, s2);
        let rv = r0 + d01 * (ss - s0) + c2 * (ss - s0) * (ss - s1);
        (ss, rv.min(r1))
    } else {
        (s1, r1)
    };
    let h_star = crate::numerics::quad::interp_cubic(&curve.s, &curve.h, s_star);
    NeckLocation { index: i, r_min: r_star, s: s_star, h: h_star, local_min }
}

/// Window around the neck rescaled by `1/r_min` and compared with `cosh`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NeckDiagnostic {
    pub location: NeckLocation,
    /// Rescaled samples `((r)/r_min, (h − h_neck)/r_min)` inside the window.
    pub window: Vec<(f64, f64)>,
    /// `sup |ρ − cosh z|` over the window.
    pub residual: f64,
    pub is_neck: bool,
    /// The requested window reached past an end of the curve.
    pub clipped: bool,
    pub notice: Option<String>,
    /// Sign of `d r_min / dt` from the recent history, when known.
    pub trend: Option<f64>,
}

/// Rescale the samples within rescaled arclength `halfwidth` of the neck.
pub fn neck_diagnostic(curve: &ProfileCurve, halfwidth: f64, trend: Option<f64>) -> NeckDiagnostic {
    let loc = locate_neck(curve);
    let n = curve.len();
    let rho = loc.r_min.max(f64::MIN_POSITIVE);
    // arclength along the polygon
    let mut arc = vec![0.0; n];
    for i in 1..n {
        arc[i] = arc[i - 1] + (curve.r[i] - curve.r[i - 1]).hypot(curve.h[i] - curve.h[i - 1]);
    }
    let a_star = crate::numerics::quad::interp_cubic(&curve.s, &arc, loc.s);
    let reach = halfwidth * rho;
    let clipped = a_star - reach < arc[0] || a_star + reach > arc[n - 1];
    let mut window = Vec::new();
    let mut residual: f64 = 0.0;
    for i in 0..n {
        if (arc[i] - a_star).abs() <= reach {
            let p = curve.r[i] / rho;
            let z = (curve.h[i] - loc.h) / rho;
            residual = residual.max((p - z.cosh()).abs());
            window.push((p, z));
        }
    }
    let notice = clipped.then(|| format!("window of half-width {halfwidth} clipped at the curve ends"));
    NeckDiagnostic {
        location: loc,
        window,
        is_neck: loc.local_min && residual <= NOT_A_NECK,
        residual,
        clipped,
        notice,
        trend,
    }
}
