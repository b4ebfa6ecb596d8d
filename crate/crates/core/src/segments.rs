//! Analytic profile pieces and their concatenation into sampled curves.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numerics::{adaptive_simpson, Integral, QuadSettings};
use crate::profile::energy::{curvatures, density};
use crate::profile::{Jet, ProfileCurve};

/// Point with first and second derivatives in the segment parameter:
/// `[r, h, r', h', r'', h'']`.
pub type P6 = [f64; 6];

type EvalFn = Arc<dyn Fn(f64) -> P6 + Send + Sync>;

/// Smooth parametrized piece of a profile on `[t0, t1]`.
#[derive(Clone)]
pub struct Segment {
    pub label: String,
    pub t0: f64,
    pub t1: f64,
    /// Length scale the sampler must resolve in addition to curvature.
    pub feature: f64,
    f: EvalFn,
}

impl std::fmt::Debug for Segment {
    fn fmt(&self, fm: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(fm, "Segment({}, [{}, {}])", self.label, self.t0, self.t1)
    }
}

impl Segment {
    pub fn new<F: Fn(f64) -> P6 + Send + Sync + 'static>(label: &str, t0: f64, t1: f64, f: F) -> Self {
        Segment { label: label.to_string(), t0, t1, feature: f64::INFINITY, f: Arc::new(f) }
    }

    pub fn with_feature(mut self, scale: f64) -> Self {
        self.feature = scale;
        self
    }

    /// Catenary `t ↦ (cosh(λt)/λ, t)`.
    pub fn catenary(label: &str, lambda: f64, t0: f64, t1: f64) -> Self {
        Segment::new(label, t0, t1, move |t| {
            let (c, s) = ((lambda * t).cosh(), (lambda * t).sinh());
            [c / lambda, t, s, 1.0, lambda * c, 0.0]
        })
    }

    /// Circle arc `t ↦ (R sin t, c − R cos t)`: `t = 0` is the bottom pole,
    /// increasing `t` runs counterclockwise.
    pub fn circle(label: &str, radius: f64, center_h: f64, t0: f64, t1: f64) -> Self {
        Segment::new(label, t0, t1, move |t| {
            let (s, c) = t.sin_cos();
            let r = if t == 0.0 || t == PI { 0.0 } else { radius * s };
            [r, center_h - radius * c, radius * c, radius * s, -radius * s, radius * c]
        })
    }

    /// Graph `x ↦ (x, g(x))` for `g` returning `(g, g', g'')`.
    pub fn graph<G: Fn(f64) -> (f64, f64, f64) + Send + Sync + 'static>(label: &str, x0: f64, x1: f64, g: G) -> Self {
        Segment::new(label, x0, x1, move |x| {
            let (v, d1, d2) = g(x);
            [x, v, 1.0, d1, 0.0, d2]
        })
    }

    #[inline]
    pub fn eval(&self, t: f64) -> P6 {
        (self.f)(t)
    }

    pub fn start(&self) -> (f64, f64) {
        let p = self.eval(self.t0);
        (p[0], p[1])
    }

    pub fn end(&self) -> (f64, f64) {
        let p = self.eval(self.t1);
        (p[0], p[1])
    }

    /// Same image traversed backwards.
    pub fn reversed(&self) -> Segment {
        let f = self.f.clone();
        let (a, b) = (self.t0, self.t1);
        Segment {
            label: self.label.clone(),
            t0: a,
            t1: b,
            feature: self.feature,
            f: Arc::new(move |t| {
                let p = f(a + b - t);
                [p[0], p[1], -p[2], -p[3], p[4], p[5]]
            }),
        }
    }

    /// Reflection `h ↦ −h`.
    pub fn mirrored(&self) -> Segment {
        let f = self.f.clone();
        Segment {
            f: Arc::new(move |t| {
                let p = f(t);
                [p[0], -p[1], p[2], -p[3], p[4], -p[5]]
            }),
            ..self.clone()
        }
    }

    /// Translation `h ↦ h + dh`.
    pub fn shifted(&self, dh: f64) -> Segment {
        let f = self.f.clone();
        Segment {
            f: Arc::new(move |t| {
                let mut p = f(t);
                p[1] += dh;
                p
            }),
            ..self.clone()
        }
    }

    /// Dilation by `σ`.
    pub fn scaled(&self, sigma: f64) -> Segment {
        let f = self.f.clone();
        Segment {
            f: Arc::new(move |t| {
                let p = f(t);
                p.map(|v| v * sigma)
            }),
            feature: self.feature * sigma,
            ..self.clone()
        }
    }

    pub fn speed(&self, t: f64) -> f64 {
        let p = self.eval(t);
        p[2].hypot(p[3])
    }

    pub fn length(&self) -> f64 {
        gauss_length(self, self.t0, self.t1, 64)
    }

    /// Willmore energy of the rotated piece by adaptive Simpson.
    pub fn energy(&self, q: QuadSettings) -> Integral {
        adaptive_simpson(
            |t| {
                let p = self.eval(t);
                density(p[0], p[2], p[3], p[4], p[5])
            },
            self.t0,
            self.t1,
            q,
        )
    }

    /// `max(|κ₁|, |κ₂|)` at `t`.
    pub fn curvature(&self, t: f64) -> f64 {
        let p = self.eval(t);
        let (k1, k2) = curvatures(p[0], p[2], p[3], p[4], p[5]);
        k1.abs().max(k2.abs())
    }
}

const GL5_X: [f64; 5] = [
    0.0,
    -0.538_469_310_105_683_1,
    0.538_469_310_105_683_1,
    -0.906_179_845_938_664,
    0.906_179_845_938_664,
];
const GL5_W: [f64; 5] = [
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
    0.236_926_885_056_189_1,
];

fn gauss_length(seg: &Segment, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for k in 0..panels {
        let m = a + h * (k as f64 + 0.5);
        for q in 0..5 {
            total += 0.5 * h * GL5_W[q] * seg.speed(m + 0.5 * h * GL5_X[q]);
        }
    }
    total
}

/// Sampling controls for [`Chain::sample`].
#[derive(Debug, Clone, Copy)]
pub struct SampleSpec {
    pub n: usize,
    /// Samples per radius of curvature (relative weight of curvature).
    pub per_radius: f64,
    /// Bound on the relative growth of the spacing per unit spacing.
    pub grading: f64,
    /// Pre-grid intervals per segment.
    pub pre_grid: usize,
}

impl SampleSpec {
    pub fn new(n: usize) -> Self {
        SampleSpec { n, per_radius: 8.0, grading: 0.08, pre_grid: 1500 }
    }
}

/// Concatenation of segments joined continuously.
#[derive(Debug, Clone, Default)]
pub struct Chain {
    pub segments: Vec<Segment>,
}

impl Chain {
    pub fn new(segments: Vec<Segment>) -> Result<Chain> {
        for w in segments.windows(2) {
            let (a, b) = (w[0].end(), w[1].start());
            let gap = (a.0 - b.0).hypot(a.1 - b.1);
            let scale = 1.0 + a.0.abs().max(a.1.abs());
            if gap > 1e-9 * scale {
                return Err(Error::Parameter(format!(
                    "segments `{}` and `{}` do not join (gap {gap:.3e})",
                    w[0].label, w[1].label
                )));
            }
        }
        Ok(Chain { segments })
    }

    pub fn push(&mut self, seg: Segment) {
        self.segments.push(seg);
    }

    pub fn reversed(&self) -> Chain {
        Chain { segments: self.segments.iter().rev().map(Segment::reversed).collect() }
    }

    pub fn mirrored(&self) -> Chain {
        Chain { segments: self.segments.iter().map(Segment::mirrored).collect() }
    }

    pub fn shifted(&self, dh: f64) -> Chain {
        Chain { segments: self.segments.iter().map(|s| s.shifted(dh)).collect() }
    }

    pub fn scaled(&self, sigma: f64) -> Chain {
        Chain { segments: self.segments.iter().map(|s| s.scaled(sigma)).collect() }
    }

    pub fn then(mut self, other: Chain) -> Result<Chain> {
        self.segments.extend(other.segments);
        Chain::new(self.segments)
    }

    /// Energy per segment label, summed over segments sharing a label.
    pub fn energy_by_label(&self, q: QuadSettings) -> Vec<(String, Integral)> {
        let mut out: Vec<(String, Integral)> = Vec::new();
        for s in &self.segments {
            let e = s.energy(q);
            match out.iter_mut().find(|(l, _)| *l == s.label) {
                Some((_, acc)) => *acc = *acc + e,
                None => out.push((s.label.clone(), e)),
            }
        }
        out
    }

    pub fn energy(&self, q: QuadSettings) -> Integral {
        self.segments.iter().map(|s| s.energy(q)).sum()
    }

    /// Sample by equidistributing a monitor that blends uniform arclength
    /// with curvature and segment feature scales, then grading it. The
    /// parameter is arclength and exact derivatives are attached.
    pub fn sample(&self, spec: SampleSpec) -> Result<ProfileCurve> {
        let m = spec.pre_grid;
        // pre-grid nodes: (segment, t), cumulative arclength, target spacing
        let mut nodes: Vec<(usize, f64)> = Vec::new();
        for (k, seg) in self.segments.iter().enumerate() {
            let start = if k == 0 { 0 } else { 1 };
            for i in start..=m {
                nodes.push((k, seg.t0 + (seg.t1 - seg.t0) * i as f64 / m as f64));
            }
        }
        let np = nodes.len();
        let mut arc = vec![0.0; np];
        for i in 1..np {
            let (k, t) = nodes[i];
            let (kp, tp) = nodes[i - 1];
            let a = if kp == k { tp } else { self.segments[k].t0 };
            arc[i] = arc[i - 1] + gauss_length(&self.segments[k], a, t, 1);
        }
        let total = arc[np - 1];
        let mut sigma: Vec<f64> = nodes
            .iter()
            .map(|&(k, t)| {
                let seg = &self.segments[k];
                let kappa = seg.curvature(t);
                let curv_scale = if kappa > 0.0 { 1.0 / (spec.per_radius * kappa) } else { f64::INFINITY };
                let feat = seg.feature / spec.per_radius;
                curv_scale.min(feat).min(total)
            })
            .collect();
        // grading: sigma(s) <= sigma(s') + g |s - s'|
        for i in 1..np {
            sigma[i] = sigma[i].min(sigma[i - 1] + spec.grading * (arc[i] - arc[i - 1]));
        }
        for i in (0..np - 1).rev() {
            sigma[i] = sigma[i].min(sigma[i + 1] + spec.grading * (arc[i + 1] - arc[i]));
        }
        // cumulative monitor: uniform part plus curvature part
        let uniform = 1.0 / total;
        let mut mon = vec![0.0; np];
        let mut curv_total = 0.0;
        for i in 1..np {
            let ds = arc[i] - arc[i - 1];
            curv_total += ds * 0.5 * (1.0 / sigma[i] + 1.0 / sigma[i - 1]);
            mon[i] = curv_total;
        }
        let cum: Vec<f64> = (0..np).map(|i| 0.5 * arc[i] * uniform + 0.5 * mon[i] / curv_total).collect();
        let n = spec.n;
        let (mut s, mut r, mut h, mut jets) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        let mut j = 0;
        for q in 0..n {
            let target = cum[np - 1] * q as f64 / (n - 1) as f64;
            while j + 1 < np - 1 && cum[j + 1] < target {
                j += 1;
            }
            let (a, b) = (cum[j], cum[j + 1]);
            let w = if b > a { ((target - a) / (b - a)).clamp(0.0, 1.0) } else { 0.0 };
            let (k, t1) = nodes[j + 1];
            let t_lo = if nodes[j].0 == k { nodes[j].1 } else { self.segments[k].t0 };
            let t = t_lo + w * (t1 - t_lo);
            let base_s = arc[j];
            let seg = &self.segments[k];
            let sv = base_s + gauss_length(seg, t_lo, t, 1);
            let p = seg.eval(t);
            let v = p[2].hypot(p[3]);
            let (tr, th) = (p[2] / v, p[3] / v);
            let acc_t = (p[2] * p[4] + p[3] * p[5]) / v;
            let jet = Jet {
                dr: tr,
                dh: th,
                ddr: (p[4] - acc_t * tr) / (v * v),
                ddh: (p[5] - acc_t * th) / (v * v),
            };
            s.push(sv);
            r.push(p[0]);
            h.push(p[1]);
            jets.push(jet);
        }
        let scale = crate::profile::diameter_of(&r, &h);
        let flags = (r[0].abs() <= 1e-12 * scale, r[n - 1].abs() <= 1e-12 * scale);
        ProfileCurve::new(s, r, h, flags)?.with_jets(jets)
    }
}

impl Chain {
    /// Samples each segment on its own and joins them with breaks at the
    /// segment ends, for chains whose curvature jumps at the joins. About
    /// `n` samples in total, shared by length.
    pub fn sample_broken(&self, spec: SampleSpec) -> Result<ProfileCurve> {
        let lengths: Vec<f64> = self.segments.iter().map(|g| g.length()).collect();
        let total: f64 = lengths.iter().sum();
        let (mut s, mut r, mut h, mut jets, mut breaks) = (Vec::new(), Vec::new(), Vec::new(), Vec::new(), Vec::new());
        let mut break_jets = Vec::new();
        for (k, seg) in self.segments.iter().enumerate() {
            let m = ((spec.n as f64 * lengths[k] / total).round() as usize).max(33);
            let piece = Chain::new(vec![seg.clone()])?.sample(SampleSpec { n: m, ..spec })?;
            let pj = piece.jets.as_ref().ok_or_else(|| Error::Parameter("sampled piece without jets".into()))?;
            let (skip, offset) = match s.last() {
                Some(&last) => {
                    breaks.push(s.len() - 1);
                    break_jets.push(pj[0]);
                    (1, last - piece.s[0])
                }
                None => (0, -piece.s[0]),
            };
            for i in skip..piece.len() {
                s.push(piece.s[i] + offset);
                r.push(piece.r[i]);
                h.push(piece.h[i]);
                jets.push(pj[i]);
            }
        }
        let n = r.len();
        let scale = crate::profile::diameter_of(&r, &h);
        let flags = (r[0].abs() <= 1e-12 * scale, r[n - 1].abs() <= 1e-12 * scale);
        ProfileCurve::new(s, r, h, flags)?.with_jets(jets)?.with_breaks(breaks)?.with_break_jets(break_jets)
    }
}
