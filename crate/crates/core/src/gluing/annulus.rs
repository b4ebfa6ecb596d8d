//! Height fields over annuli, their δ-gluing and graph Willmore energy.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::GluingProfile;
use crate::error::{Error, Result};
use crate::numerics::fd::fornberg;
use crate::numerics::quad::simpson_weights;
use crate::numerics::Integral;

/// Polar derivatives `[u, u_r, u_φ, u_rr, u_rφ, u_φφ]`.
pub type PolarJet = [f64; 6];

/// Cartesian derivatives `[u, u_x, u_y, u_xx, u_xy, u_yy]`.
pub type CartJet = [f64; 6];

/// Radial samples used when no grid is given.
pub const DEFAULT_NR: usize = 513;
/// Angular samples used when no grid is given.
pub const DEFAULT_NPHI: usize = 128;

/// Tensor grid `r_i = inner + i (outer - inner)/(n_r - 1)`, `φ_j = 2πj/n_φ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarGrid {
    pub inner: f64,
    pub outer: f64,
    pub n_r: usize,
    pub n_phi: usize,
}

impl PolarGrid {
    pub fn new(inner: f64, outer: f64, n_r: usize, n_phi: usize) -> Result<Self> {
        if !(inner > 0.0 && outer > inner && outer.is_finite()) {
            return Err(Error::Parameter(format!("annulus radii must satisfy 0 < inner < outer, got [{inner}, {outer}]")));
        }
        if n_r < 5 || n_phi < 4 {
            return Err(Error::Parameter(format!("grid {n_r}x{n_phi} too small (need at least 5x4)")));
        }
        Ok(PolarGrid { inner, outer, n_r, n_phi })
    }

    /// `Ann[1-δ, 1+δ]`.
    pub fn annulus(delta: f64, n_r: usize, n_phi: usize) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::Parameter(format!("annulus half-width must lie in (0,1), got {delta}")));
        }
        Self::new(1.0 - delta, 1.0 + delta, n_r, n_phi)
    }

    #[inline]
    pub fn radius(&self, i: usize) -> f64 {
        if i + 1 == self.n_r {
            self.outer
        } else {
            self.inner + (self.outer - self.inner) * i as f64 / (self.n_r - 1) as f64
        }
    }

    #[inline]
    pub fn angle(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.n_phi as f64
    }

    pub fn radii(&self) -> Vec<f64> {
        (0..self.n_r).map(|i| self.radius(i)).collect()
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.outer - self.inner)
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        i * self.n_phi + j
    }
}

/// Scalar height `u` over an annulus. Values are stored row-major by radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnulusGraph {
    pub grid: PolarGrid,
    pub values: Vec<f64>,
    /// Analytic polar derivatives, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jets: Option<Vec<PolarJet>>,
    /// Set when `u` depends on the radius only.
    #[serde(default)]
    pub radial: bool,
}

impl AnnulusGraph {
    /// Grid values only; derivatives come from finite differences.
    pub fn from_values(grid: PolarGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_r * grid.n_phi {
            return Err(Error::Parameter(format!("expected {} values, got {}", grid.n_r * grid.n_phi, values.len())));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Parameter(format!("non-finite height at grid index {k}")));
        }
        Ok(AnnulusGraph { grid, values, jets: None, radial: false })
    }

    /// Sample `f(r, φ)` returning a polar jet.
    pub fn from_polar<F: Fn(f64, f64) -> PolarJet>(grid: PolarGrid, f: F) -> Result<Self> {
        let mut jets = Vec::with_capacity(grid.n_r * grid.n_phi);
        for i in 0..grid.n_r {
            let r = grid.radius(i);
            for j in 0..grid.n_phi {
                jets.push(f(r, grid.angle(j)));
            }
        }
        Self::with_jets(grid, jets, false)
    }

    /// Sample `f(x, y)` returning a Cartesian jet.
    pub fn from_cartesian<F: Fn(f64, f64) -> CartJet>(grid: PolarGrid, f: F) -> Result<Self> {
        Self::from_polar(grid, |r, phi| {
            let (s, c) = phi.sin_cos();
            cart_to_polar(r, c, s, f(r * c, r * s))
        })
    }

    /// Rotationally symmetric `u(x,y) = g(|(x,y)|)` for `g` returning `(g, g', g'')`.
    pub fn radial<G: Fn(f64) -> (f64, f64, f64)>(grid: PolarGrid, g: G) -> Result<Self> {
        let mut jets = Vec::with_capacity(grid.n_r * grid.n_phi);
        for i in 0..grid.n_r {
            let (v, d1, d2) = g(grid.radius(i));
            jets.extend(std::iter::repeat_n([v, d1, 0.0, d2, 0.0, 0.0], grid.n_phi));
        }
        Self::with_jets(grid, jets, true)
    }

    fn with_jets(grid: PolarGrid, jets: Vec<PolarJet>, radial: bool) -> Result<Self> {
        if let Some(k) = jets.iter().position(|q| q.iter().any(|v| !v.is_finite())) {
            let (i, j) = (k / grid.n_phi, k % grid.n_phi);
            return Err(Error::Domain(format!("non-finite derivative at r={}, φ={}", grid.radius(i), grid.angle(j))));
        }
        let values = jets.iter().map(|q| q[0]).collect();
        Ok(AnnulusGraph { grid, values, jets: Some(jets), radial })
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.idx(i, j)]
    }

    /// Polar jets, analytic or from fourth-order differences.
    pub fn polar_jets(&self) -> Vec<PolarJet> {
        match &self.jets {
            Some(j) => j.clone(),
            None => fd_polar_jets(&self.grid, &self.values),
        }
    }

    /// Cartesian jets at every grid node.
    pub fn cartesian_jets(&self) -> Vec<CartJet> {
        let g = &self.grid;
        let pj = self.polar_jets();
        let mut out = Vec::with_capacity(pj.len());
        for i in 0..g.n_r {
            let r = g.radius(i);
            for j in 0..g.n_phi {
                let (s, c) = g.angle(j).sin_cos();
                out.push(polar_to_cart(r, c, s, pj[g.idx(i, j)]));
            }
        }
        out
    }

    /// `‖u‖_{C²} = sup|u| + sup|∇u| + sup‖D²u‖` with the Euclidean and
    /// Frobenius norms on each order.
    pub fn c2_norm(&self) -> f64 {
        c2_norm_of(&self.cartesian_jets())
    }

    /// `u2 − u1` on a shared grid.
    pub fn difference(u2: &AnnulusGraph, u1: &AnnulusGraph) -> Result<AnnulusGraph> {
        same_grid(u1, u2)?;
        let values = u2.values.iter().zip(&u1.values).map(|(a, b)| a - b).collect();
        let jets = match (&u1.jets, &u2.jets) {
            (Some(a), Some(b)) => Some(b.iter().zip(a).map(|(q2, q1)| std::array::from_fn(|k| q2[k] - q1[k])).collect()),
            _ => None,
        };
        Ok(AnnulusGraph { grid: u1.grid, values, jets, radial: u1.radial && u2.radial })
    }

    /// `σ u`.
    pub fn scaled(&self, sigma: f64) -> AnnulusGraph {
        AnnulusGraph {
            grid: self.grid,
            values: self.values.iter().map(|v| sigma * v).collect(),
            jets: self.jets.as_ref().map(|j| j.iter().map(|q| q.map(|v| sigma * v)).collect()),
            radial: self.radial,
        }
    }
}

/// Per-order sup norms summed, from Cartesian jets.
pub fn c2_norm_of(jets: &[CartJet]) -> f64 {
    let (mut n0, mut n1, mut n2) = (0.0f64, 0.0f64, 0.0f64);
    for q in jets {
        n0 = n0.max(q[0].abs());
        n1 = n1.max(q[1].hypot(q[2]));
        n2 = n2.max((q[3] * q[3] + 2.0 * q[4] * q[4] + q[5] * q[5]).sqrt());
    }
    n0 + n1 + n2
}

pub fn cart_to_polar(r: f64, c: f64, s: f64, q: CartJet) -> PolarJet {
    let [u, ux, uy, uxx, uxy, uyy] = q;
    let ur = c * ux + s * uy;
    let tang = -s * ux + c * uy;
    [
        u,
        ur,
        r * tang,
        c * c * uxx + 2.0 * c * s * uxy + s * s * uyy,
        tang + r * (-c * s * uxx + (c * c - s * s) * uxy + c * s * uyy),
        r * r * (s * s * uxx - 2.0 * c * s * uxy + c * c * uyy) - r * ur,
    ]
}

pub fn polar_to_cart(r: f64, c: f64, s: f64, q: PolarJet) -> CartJet {
    let [u, ur, up, urr, urp, upp] = q;
    let lap_t = ur / r + upp / (r * r);
    let mix = urp / r - up / (r * r);
    [
        u,
        c * ur - s * up / r,
        s * ur + c * up / r,
        c * c * urr + s * s * lap_t - 2.0 * s * c * mix,
        s * c * (urr - lap_t) + (c * c - s * s) * mix,
        s * s * urr + c * c * lap_t + 2.0 * s * c * mix,
    ]
}

fn same_grid(a: &AnnulusGraph, b: &AnnulusGraph) -> Result<()> {
    if a.grid != b.grid {
        return Err(Error::Parameter(format!("grid mismatch: {:?} vs {:?}", a.grid, b.grid)));
    }
    Ok(())
}

fn fd_polar_jets(g: &PolarGrid, u: &[f64]) -> Vec<PolarJet> {
    let radii = g.radii();
    let (nr, np) = (g.n_r, g.n_phi);
    let dphi = 2.0 * PI / np as f64;
    // angular derivatives, periodic fourth order
    let mut up = vec![0.0; u.len()];
    let mut upp = vec![0.0; u.len()];
    for i in 0..nr {
        for j in 0..np {
            let at = |k: isize| u[g.idx(i, (j as isize + k).rem_euclid(np as isize) as usize)];
            up[g.idx(i, j)] = (at(-2) - 8.0 * at(-1) + 8.0 * at(1) - at(2)) / (12.0 * dphi);
            upp[g.idx(i, j)] = (-at(-2) + 16.0 * at(-1) - 30.0 * at(0) + 16.0 * at(1) - at(2)) / (12.0 * dphi * dphi);
        }
    }
    let mut out = vec![[0.0; 6]; u.len()];
    for i in 0..nr {
        let lo = i.saturating_sub(2).min(nr - 5);
        let w = fornberg(radii[i], &radii[lo..lo + 5], 2);
        for j in 0..np {
            let (mut ur, mut urr, mut urp) = (0.0, 0.0, 0.0);
            for k in 0..5 {
                let id = g.idx(lo + k, j);
                ur += w[1][k] * u[id];
                urr += w[2][k] * u[id];
                urp += w[1][k] * up[id];
            }
            let id = g.idx(i, j);
            out[id] = [u[id], ur, up[id], urr, urp, upp[id]];
        }
    }
    out
}

/// Radial cutoff with derivatives `(φ, φ', φ'')` at a radius.
pub trait Cutoff {
    fn eval(&self, r: f64) -> (f64, f64, f64);
}

impl Cutoff for GluingProfile {
    fn eval(&self, r: f64) -> (f64, f64, f64) {
        GluingProfile::eval(self, r)
    }
}

/// `1 − φ`.
pub struct Complement<'a, C: Cutoff>(pub &'a C);

impl<C: Cutoff> Cutoff for Complement<'_, C> {
    fn eval(&self, r: f64) -> (f64, f64, f64) {
        let (p, d1, d2) = self.0.eval(r);
        (1.0 - p, -d1, -d2)
    }
}

/// `ũ = (1 − φ(|x|)) u₁ + φ(|x|) u₂`, exactly `u₁` where `φ = 0` and
/// exactly `u₂` where `φ = 1`. Derivatives follow the product rule when both
/// inputs carry jets.
pub fn delta_glue(u1: &AnnulusGraph, u2: &AnnulusGraph, phi: &impl Cutoff) -> Result<AnnulusGraph> {
    same_grid(u1, u2)?;
    let g = u1.grid;
    let mut values = Vec::with_capacity(u1.values.len());
    let mut jets = match (&u1.jets, &u2.jets) {
        (Some(_), Some(_)) => Some(Vec::with_capacity(u1.values.len())),
        _ => None,
    };
    for i in 0..g.n_r {
        let (p, d1, d2) = phi.eval(g.radius(i));
        for j in 0..g.n_phi {
            let id = g.idx(i, j);
            let (a, b) = (u1.values[id], u2.values[id]);
            values.push(if p == 0.0 {
                a
            } else if p == 1.0 {
                b
            } else {
                a + p * (b - a)
            });
            if let (Some(out), Some(ja), Some(jb)) = (jets.as_mut(), &u1.jets, &u2.jets) {
                let (q1, q2) = (ja[id], jb[id]);
                out.push(if p == 0.0 && d1 == 0.0 && d2 == 0.0 {
                    q1
                } else if p == 1.0 && d1 == 0.0 && d2 == 0.0 {
                    q2
                } else {
                    let d: [f64; 6] = std::array::from_fn(|k| q2[k] - q1[k]);
                    [
                        values[values.len() - 1],
                        q1[1] + p * d[1] + d1 * d[0],
                        q1[2] + p * d[2],
                        q1[3] + p * d[3] + 2.0 * d1 * d[1] + d2 * d[0],
                        q1[4] + p * d[4] + d1 * d[2],
                        q1[5] + p * d[5],
                    ]
                });
            }
        }
    }
    Ok(AnnulusGraph { grid: g, values, jets, radial: u1.radial && u2.radial })
}

/// `H² √det G` of the graph `(x, y, u(x,y))` from its Cartesian jet.
#[inline]
pub fn graph_density(q: &CartJet) -> f64 {
    let [_, ux, uy, uxx, uxy, uyy] = *q;
    let w = 1.0 + ux * ux + uy * uy;
    let num = (1.0 + uy * uy) * uxx - 2.0 * ux * uy * uxy + (1.0 + ux * ux) * uyy;
    num * num / (4.0 * w * w * w.sqrt())
}

/// Graph Willmore energy by Simpson in `r` and the trapezoidal rule in `φ`,
/// with a Richardson estimate from the half-resolution subgrid. With
/// `tol`, an estimate above it is an error.
pub fn willmore_energy_graph(g: &AnnulusGraph, tol: Option<f64>) -> Result<Integral> {
    let grid = &g.grid;
    let jets = g.cartesian_jets();
    let radii = grid.radii();
    let row: Vec<f64> = (0..grid.n_r)
        .map(|i| {
            let base = grid.idx(i, 0);
            let sum: f64 = jets[base..base + grid.n_phi].iter().map(graph_density).sum();
            sum * radii[i] * 2.0 * PI / grid.n_phi as f64
        })
        .collect();
    let fine: f64 = simpson_weights(&radii).iter().zip(&row).map(|(w, f)| w * f).sum();
    // coarse: every other radius and every other angle
    let coarse_r: Vec<usize> = (0..grid.n_r).step_by(2).chain(if grid.n_r % 2 == 0 { Some(grid.n_r - 1) } else { None }).collect();
    let np2 = grid.n_phi / 2;
    let coarse_row: Vec<f64> = coarse_r
        .iter()
        .map(|&i| {
            let sum: f64 = (0..np2).map(|j| graph_density(&jets[grid.idx(i, 2 * j)])).sum();
            sum * radii[i] * 2.0 * PI / np2 as f64
        })
        .collect();
    let cr: Vec<f64> = coarse_r.iter().map(|&i| radii[i]).collect();
    let coarse: f64 = simpson_weights(&cr).iter().zip(&coarse_row).map(|(w, f)| w * f).sum();
    let err = (fine - coarse).abs() / 15.0;
    let out = Integral { value: fine, error: err };
    if let Some(t) = tol {
        if err > t {
            return Err(Error::Unresolved { estimate: err, tol: t });
        }
    }
    Ok(out)
}

/// One-dimensional energy of a radial graph `t ↦ g(t)` over `[a, b]`:
/// `2π ∫ (t g'' + g' + g'³)² / (4t(1+g'²)^{5/2}) dt`.
pub fn radial_graph_density(t: f64, d1: f64, d2: f64) -> f64 {
    let w = 1.0 + d1 * d1;
    let num = t * d2 + d1 + d1 * d1 * d1;
    2.0 * PI * num * num / (4.0 * t * w * w * w.sqrt())
}
