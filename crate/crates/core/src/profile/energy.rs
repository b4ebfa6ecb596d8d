//! Willmore energy density of a surface of revolution and the difference
//! stencils used to evaluate it on sampled profiles.

use std::f64::consts::PI;

use crate::numerics::fd::fornberg;

/// Energy density `F` per unit parameter for a profile `(r(s), h(s))` with
/// first derivatives `(a, b)` and second derivatives `(c, d)`.
///
/// `F = (π/2) N² / (r L⁵)` with `N = r(ad - bc) + b L²`, `L = |(a, b)|`.
#[inline]
pub fn density(r: f64, a: f64, b: f64, c: f64, d: f64) -> f64 {
    if r == 0.0 {
        return 0.0;
    }
    let l2 = a * a + b * b;
    let n = r * (a * d - b * c) + b * l2;
    0.5 * PI * n * n / (r * l2 * l2 * l2.sqrt())
}

/// Density together with its partial derivatives in `(r, a, b, c, d)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct DensityGrad {
    pub f: f64,
    pub fr: f64,
    pub fa: f64,
    pub fb: f64,
    pub fc: f64,
    pub fd: f64,
}

#[inline]
pub fn density_grad(r: f64, a: f64, b: f64, c: f64, d: f64) -> DensityGrad {
    if r == 0.0 {
        return DensityGrad::default();
    }
    let k = 0.5 * PI;
    let l2 = a * a + b * b;
    let l = l2.sqrt();
    let l5 = l2 * l2 * l;
    let l7 = l5 * l2;
    let aa = a * d - b * c;
    let n = r * aa + b * l2;
    let f = k * n * n / (r * l5);
    DensityGrad {
        f,
        fr: k * (2.0 * n * aa / (r * l5) - n * n / (r * r * l5)),
        fa: k * (2.0 * n * (r * d + 2.0 * a * b) / (r * l5) - 5.0 * n * n * a / (r * l7)),
        fb: k * (2.0 * n * (-r * c + l2 + 2.0 * b * b) / (r * l5) - 5.0 * n * n * b / (r * l7)),
        fc: -PI * n * b / l5,
        fd: PI * n * a / l5,
    }
}

/// Principal curvatures `(κ₁, κ₂)`: profile curvature and the parallel
/// curvature `b/(r L)`.
pub fn curvatures(r: f64, a: f64, b: f64, c: f64, d: f64) -> (f64, f64) {
    let l2 = a * a + b * b;
    let l = l2.sqrt();
    let k1 = (a * d - b * c) / (l2 * l);
    let k2 = if r > 0.0 { b / (r * l) } else { k1 };
    (k1, k2)
}

/// One stencil entry: sample `j` contributes `sr * w` to r-derivatives and
/// `sh * w` to h-derivatives. Mirror ghosts behind an axis end carry
/// `sr = -1` (r is odd across the axis) and `sh = 1`.
#[derive(Debug, Clone, Copy)]
pub struct Tap {
    pub j: usize,
    pub sr: f64,
    pub sh: f64,
    pub w1: f64,
    pub w2: f64,
}

/// Stencils of one smooth piece covering samples `lo..=hi`.
#[derive(Debug, Clone)]
pub struct PieceStencil {
    pub lo: usize,
    pub hi: usize,
    pub taps: Vec<[Tap; 5]>,
}

/// Five-point first/second derivative stencils, piece by piece. A break
/// sample belongs to both adjacent pieces with one-sided stencils in each.
#[derive(Debug, Clone)]
pub struct Stencils {
    pub pieces: Vec<PieceStencil>,
}

impl Stencils {
    /// Build stencils on the parameter grid `s`, split into smooth pieces at
    /// `breaks` (sample indices shared by adjacent pieces). Axis ends get two
    /// mirror ghost nodes.
    pub fn build(s: &[f64], axis: (bool, bool), breaks: &[usize]) -> Stencils {
        let n = s.len();
        assert!(n >= 5, "need at least five samples");
        let mut pieces = Vec::new();
        let mut bounds: Vec<usize> = vec![0];
        bounds.extend(breaks.iter().copied().filter(|&b| b > 0 && b < n - 1));
        bounds.push(n - 1);
        bounds.dedup();
        for p in 0..bounds.len() - 1 {
            let (lo, hi) = (bounds[p], bounds[p + 1]);
            // extended index list: (position, real index, sr, sh)
            let mut ext: Vec<(f64, usize, f64, f64)> = Vec::new();
            let ghost_lo = lo == 0 && axis.0;
            let ghost_hi = hi == n - 1 && axis.1;
            if ghost_lo {
                for k in [2usize, 1] {
                    ext.push((2.0 * s[0] - s[k], k, -1.0, 1.0));
                }
            }
            for i in lo..=hi {
                ext.push((s[i], i, 1.0, 1.0));
            }
            if ghost_hi {
                for k in [1usize, 2] {
                    ext.push((2.0 * s[n - 1] - s[n - 1 - k], n - 1 - k, -1.0, 1.0));
                }
            }
            let off = if ghost_lo { 2 } else { 0 };
            let len = ext.len();
            assert!(len >= 5, "piece [{lo},{hi}] too short for a five-point stencil");
            let mut taps = Vec::with_capacity(hi - lo + 1);
            for i in lo..=hi {
                let e = i - lo + off;
                let start = e.saturating_sub(2).min(len - 5);
                let xs: Vec<f64> = ext[start..start + 5].iter().map(|t| t.0).collect();
                let w = fornberg(s[i], &xs, 2);
                let mut row = [Tap { j: 0, sr: 0.0, sh: 0.0, w1: 0.0, w2: 0.0 }; 5];
                for q in 0..5 {
                    let (_, j, sr, sh) = ext[start + q];
                    row[q] = Tap { j, sr, sh, w1: w[1][q], w2: w[2][q] };
                }
                taps.push(row);
            }
            pieces.push(PieceStencil { lo, hi, taps });
        }
        Stencils { pieces }
    }
}

impl PieceStencil {
    /// `(r', h', r'', h'')` at sample `i` of this piece.
    #[inline]
    pub fn derivs(&self, i: usize, r: &[f64], h: &[f64]) -> [f64; 4] {
        let mut out = [0.0; 4];
        for t in &self.taps[i - self.lo] {
            let (rv, hv) = (t.sr * r[t.j], t.sh * h[t.j]);
            out[0] += t.w1 * rv;
            out[1] += t.w1 * hv;
            out[2] += t.w2 * rv;
            out[3] += t.w2 * hv;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn density_of_sphere_is_two_pi_sin() {
        for k in 1..10 {
            let s = k as f64 * 0.3;
            let f = density(s.sin(), s.cos(), s.sin(), -s.sin(), s.cos());
            assert!((f - 2.0 * PI * s.sin()).abs() < 1e-13);
        }
    }

    #[test]
    fn density_partials_match_differences() {
        let x = [0.7, 0.4, -0.9, 0.3, 1.1];
        let g = density_grad(x[0], x[1], x[2], x[3], x[4]);
        let parts = [g.fr, g.fa, g.fb, g.fc, g.fd];
        for k in 0..5 {
            let f = |t: f64| {
                let mut y = x;
                y[k] = t;
                density(y[0], y[1], y[2], y[3], y[4])
            };
            let fd = crate::numerics::fd::central4(f, x[k], 1e-4);
            assert!((fd - parts[k]).abs() < 1e-8 * (1.0 + fd.abs()), "k={k}: {fd} vs {}", parts[k]);
        }
    }

    #[test]
    fn ghost_stencils_keep_symmetry_at_the_axis() {
        let n = 33;
        let s: Vec<f64> = (0..n).map(|i| PI * i as f64 / (n - 1) as f64).collect();
        let r: Vec<f64> = s.iter().map(|t| t.sin()).collect();
        let h: Vec<f64> = s.iter().map(|t| -t.cos()).collect();
        let st = Stencils::build(&s, (true, true), &[]);
        assert_eq!(st.pieces.len(), 1);
        let d0 = st.pieces[0].derivs(0, &r, &h);
        assert!((d0[0] - 1.0).abs() < 1e-5);
        assert!(d0[1].abs() < 1e-15);
        assert!(d0[2].abs() < 1e-15);
        assert!((d0[3] - 1.0).abs() < 1e-4);
    }
}
