//! Polygonal Willmore energy of a profile and its exact gradient.
//!
//! At an interior vertex with turning angle `α`, dual length `ℓ*` and
//! tangent angle `ψ` (mean of the two edge angles) the curvatures are
//! `κ₁ = α/ℓ*`, `κ₂ = sin ψ / r` and the vertex contributes
//! `(π/2) r (κ₁ + κ₂)² ℓ*`. An axis vertex owns the polar disk of radius
//! `ℓ/2`, umbilic with turning angle `2θ` against its mirror image, which
//! gives `π θ²` where `θ` is the angle of the axis edge to the horizontal.

use std::f64::consts::PI;

use crate::profile::ProfileCurve;

/// Which ends of the polygon sit on the axis. The energy depends on vertex
/// positions only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Discretization {
    pub axis: (bool, bool),
}

#[derive(Clone, Copy)]
struct Edge {
    dr: f64,
    dh: f64,
    len: f64,
    angle: f64,
}

fn edge(r: &[f64], h: &[f64], i: usize) -> Edge {
    let (dr, dh) = (r[i + 1] - r[i], h[i + 1] - h[i]);
    Edge { dr, dh, len: dr.hypot(dh), angle: dh.atan2(dr) }
}

/// Angle of the first edge above the horizontal, or of the last edge
/// measured toward the axis.
fn pole_angle(e: Edge, start: bool) -> f64 {
    if start {
        e.dh.atan2(e.dr)
    } else {
        e.dh.atan2(-e.dr)
    }
}

fn turning(p: Edge, c: Edge) -> f64 {
    (p.dr * c.dh - p.dh * c.dr).atan2(p.dr * c.dr + p.dh * c.dh)
}

impl Discretization {
    pub fn new(axis: (bool, bool)) -> Self {
        Discretization { axis }
    }

    pub fn of(curve: &ProfileCurve) -> Self {
        Self::new(curve.closed_on_axis)
    }

    /// Discrete energy; NaN when an interior radius is not positive or an
    /// edge is degenerate.
    pub fn energy(&self, r: &[f64], h: &[f64]) -> f64 {
        let n = r.len();
        let mut e = 0.0;
        let mut p = edge(r, h, 0);
        for i in 1..n - 1 {
            let c = edge(r, h, i);
            if !(r[i] > 0.0 && p.len > 0.0 && c.len > 0.0) {
                return f64::NAN;
            }
            let alpha = turning(p, c);
            let ls = 0.5 * (p.len + c.len);
            let a = alpha * r[i] / ls + (p.angle + 0.5 * alpha).sin();
            e += 0.5 * PI * a * a * ls / r[i];
            p = c;
        }
        if self.axis.0 {
            e += PI * pole_angle(edge(r, h, 0), true).powi(2);
        }
        if self.axis.1 {
            e += PI * pole_angle(edge(r, h, n - 2), false).powi(2);
        }
        e
    }

    /// Energy and its gradient in `(r, h)`. Radial components at axis
    /// vertices are zero since those radii are held at zero.
    pub fn gradient(&self, r: &[f64], h: &[f64]) -> (f64, Vec<f64>, Vec<f64>) {
        let n = r.len();
        let edges: Vec<Edge> = (0..n - 1).map(|i| edge(r, h, i)).collect();
        let (mut gr, mut gh) = (vec![0.0; n], vec![0.0; n]);
        // adjoints of edge angles and lengths
        let mut d_ang = vec![0.0; n - 1];
        let mut d_len = vec![0.0; n - 1];
        let mut e = 0.0;
        for i in 1..n - 1 {
            let (p, c) = (edges[i - 1], edges[i]);
            let alpha = turning(p, c);
            let psi = p.angle + 0.5 * alpha;
            let ls = 0.5 * (p.len + c.len);
            let ri = r[i];
            let a = alpha * ri / ls + psi.sin();
            let cp = psi.cos();
            e += 0.5 * PI * a * a * ls / ri;
            gr[i] += 0.5 * PI * (2.0 * a * alpha / ri - a * a * ls / (ri * ri));
            let g_alpha = PI * a * (1.0 + 0.5 * cp * ls / ri);
            let g_psi0 = PI * a * cp * ls / ri;
            let g_ls = 0.5 * PI * (a * a / ri - 2.0 * a * alpha / ls);
            d_ang[i] += g_alpha;
            d_ang[i - 1] += g_psi0 - g_alpha;
            d_len[i] += 0.5 * g_ls;
            d_len[i - 1] += 0.5 * g_ls;
        }
        if self.axis.0 {
            let th = pole_angle(edges[0], true);
            e += PI * th * th;
            d_ang[0] += 2.0 * PI * th;
        }
        if self.axis.1 {
            // θ = ±π − edge angle
            let th = pole_angle(edges[n - 2], false);
            e += PI * th * th;
            d_ang[n - 2] -= 2.0 * PI * th;
        }
        for (i, ed) in edges.iter().enumerate() {
            let l2 = ed.len * ed.len;
            let cr = -d_ang[i] * ed.dh / l2 + d_len[i] * ed.dr / ed.len;
            let ch = d_ang[i] * ed.dr / l2 + d_len[i] * ed.dh / ed.len;
            gr[i + 1] += cr;
            gh[i + 1] += ch;
            gr[i] -= cr;
            gh[i] -= ch;
        }
        if self.axis.0 {
            gr[0] = 0.0;
        }
        if self.axis.1 {
            gr[n - 1] = 0.0;
        }
        (e, gr, gh)
    }
}

/// Lumped mass of the weight `2π r` along the polygon: each segment of
/// length `ℓ` gives node `i` the share `2π ℓ (2r_i + r_j) / 6`.
pub fn lumped_mass(r: &[f64], h: &[f64]) -> Vec<f64> {
    let n = r.len();
    let mut m = vec![0.0; n];
    for i in 0..n - 1 {
        let l = (r[i + 1] - r[i]).hypot(h[i + 1] - h[i]);
        m[i] += 2.0 * PI * l * (2.0 * r[i] + r[i + 1]) / 6.0;
        m[i + 1] += 2.0 * PI * l * (2.0 * r[i + 1] + r[i]) / 6.0;
    }
    m
}

/// Discrete energy of the polygon through the samples of a curve.
pub fn discrete_energy(curve: &ProfileCurve) -> f64 {
    Discretization::of(curve).energy(&curve.r, &curve.h)
}

/// Gradient of [`discrete_energy`] in the node coordinates `(r, h)`.
pub fn discrete_gradient(curve: &ProfileCurve) -> (Vec<f64>, Vec<f64>) {
    let (_, gr, gh) = Discretization::of(curve).gradient(&curve.r, &curve.h);
    (gr, gh)
}
