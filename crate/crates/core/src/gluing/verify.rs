//! Empirical check of the gluing energy bound on a seeded random corpus.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::annulus::{delta_glue, willmore_energy_graph, AnnulusGraph, CartJet, PolarGrid};
use super::GluingProfile;
use crate::error::Result;

/// Random smooth height: quadratic plus three plane waves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveField {
    pub quad: [f64; 6],
    pub waves: [[f64; 4]; 3],
}

impl WaveField {
    pub fn random(rng: &mut impl Rng) -> Self {
        let mut quad = [0.0; 6];
        quad.iter_mut().for_each(|q| *q = rng.gen_range(-1.0..1.0));
        let waves = std::array::from_fn(|_| {
            let k = rng.gen_range(0.5..3.0);
            let dir: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            [rng.gen_range(-1.0..1.0), k * dir.cos(), k * dir.sin(), rng.gen_range(0.0..std::f64::consts::TAU)]
        });
        WaveField { quad, waves }
    }

    pub fn jet(&self, x: f64, y: f64) -> CartJet {
        let [a0, a1, a2, b0, b1, b2] = self.quad;
        let mut q = [
            a0 + a1 * x + a2 * y + b0 * x * x + b1 * x * y + b2 * y * y,
            a1 + 2.0 * b0 * x + b1 * y,
            a2 + b1 * x + 2.0 * b2 * y,
            2.0 * b0,
            b1,
            2.0 * b2,
        ];
        for [amp, kx, ky, p] in self.waves {
            let (s, c) = (kx * x + ky * y + p).sin_cos();
            q[0] += amp * s;
            q[1] += amp * kx * c;
            q[2] += amp * ky * c;
            q[3] -= amp * kx * kx * s;
            q[4] -= amp * kx * ky * s;
            q[5] -= amp * ky * ky * s;
        }
        q
    }
}

/// Corpus and fit settings.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct GluingConfig {
    pub delta: f64,
    pub n_r: usize,
    pub n_phi: usize,
    pub seed: u64,
    pub n_train: usize,
    pub n_holdout: usize,
    /// The fitted constant is the largest training ratio times `1 + margin`.
    pub margin: f64,
    /// Target norms `‖u_i‖_{C²}` are uniform on `[0.1, max_norm)`; values
    /// above 1 exercise the hypothesis filter.
    pub max_norm: f64,
    pub slope_scales: Vec<f64>,
    pub slope_tol: f64,
}

impl Default for GluingConfig {
    fn default() -> Self {
        GluingConfig {
            delta: 0.1,
            n_r: super::annulus::DEFAULT_NR,
            n_phi: super::annulus::DEFAULT_NPHI,
            seed: 7,
            n_train: 50,
            n_holdout: 50,
            margin: 0.5,
            max_norm: 1.05,
            slope_scales: vec![1e-1, 1e-2, 1e-3, 1e-4],
            slope_tol: 0.15,
        }
    }
}

/// One evaluated pair.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairRow {
    pub id: usize,
    pub set: String,
    pub norm_u1: f64,
    pub norm_u2: f64,
    pub norm_diff: f64,
    pub w_u1: f64,
    pub w_glued: f64,
    pub excess: f64,
    pub ratio: f64,
    /// Held-out rows: `excess ≤ C · norm_diff`.
    pub within_bound: Option<bool>,
}

/// Pair dropped by the hypothesis filter.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SkipNotice {
    pub id: usize,
    pub norm_u1: f64,
    pub norm_u2: f64,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SlopeRow {
    pub scale: f64,
    pub norm_diff: f64,
    pub excess: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GluingReport {
    pub config: GluingConfig,
    pub realized_m: f64,
    pub max_train_ratio: f64,
    pub fitted_c: f64,
    pub rows: Vec<PairRow>,
    pub skipped: Vec<SkipNotice>,
    pub holdout_violations: usize,
    pub slope_rows: Vec<SlopeRow>,
    pub slope: f64,
    pub slope_ok: bool,
    pub passed: bool,
}

struct PairSpec {
    id: usize,
    base: WaveField,
    base_scale: f64,
    other: WaveField,
    other_scale: f64,
}

/// Excess `W(ũ) − W(u₁)` and the two energies.
pub fn excess(u1: &AnnulusGraph, u2: &AnnulusGraph, phi: &GluingProfile) -> Result<(f64, f64, f64)> {
    let w1 = willmore_energy_graph(u1, None)?.value;
    let glued = delta_glue(u1, u2, phi)?;
    let wg = willmore_energy_graph(&glued, None)?.value;
    Ok((wg - w1, w1, wg))
}

fn unit_norm(grid: PolarGrid, f: &WaveField) -> Result<f64> {
    Ok(AnnulusGraph::from_cartesian(grid, |x, y| f.jet(x, y))?.c2_norm())
}

/// Build the corpus, fit `C` on the training half, test the held-out half
/// and sweep `u₂ = u₁ + c·B` for the linear decay of the excess.
pub fn verify_gluing_bound(cfg: &GluingConfig) -> Result<GluingReport> {
    let grid = PolarGrid::annulus(cfg.delta, cfg.n_r, cfg.n_phi)?;
    let phi = GluingProfile::new(cfg.delta)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut specs = Vec::new();
    for id in 0..(cfg.n_train + cfg.n_holdout) * 2 {
        let base = WaveField::random(&mut rng);
        let target = rng.gen_range(0.1..cfg.max_norm);
        let other = WaveField::random(&mut rng);
        let target2 = rng.gen_range(0.1..cfg.max_norm);
        specs.push((id, base, target, other, target2));
    }
    // normalize in parallel, keep order
    let specs: Vec<PairSpec> = specs
        .into_par_iter()
        .map(|(id, base, target, other, target2)| -> Result<PairSpec> {
            let nb = unit_norm(grid, &base)?;
            let no = unit_norm(grid, &other)?;
            Ok(PairSpec { id, base, base_scale: target / nb, other, other_scale: target2 / no })
        })
        .collect::<Result<_>>()?;
    let evaluated: Vec<std::result::Result<PairRow, SkipNotice>> = specs
        .par_iter()
        .map(|p| -> Result<_> {
            let u1 = AnnulusGraph::from_cartesian(grid, |x, y| p.base.jet(x, y).map(|v| v * p.base_scale))?;
            let u2 = AnnulusGraph::from_cartesian(grid, |x, y| p.other.jet(x, y).map(|v| v * p.other_scale))?;
            let (n1, n2) = (u1.c2_norm(), u2.c2_norm());
            if n1 > 1.0 || n2 > 1.0 {
                return Ok(Err(SkipNotice { id: p.id, norm_u1: n1, norm_u2: n2, reason: "C2 norm above 1".into() }));
            }
            let nd = AnnulusGraph::difference(&u2, &u1)?.c2_norm();
            let (ex, w1, wg) = excess(&u1, &u2, &phi)?;
            Ok(Ok(PairRow {
                id: p.id,
                set: String::new(),
                norm_u1: n1,
                norm_u2: n2,
                norm_diff: nd,
                w_u1: w1,
                w_glued: wg,
                excess: ex,
                ratio: ex / nd,
                within_bound: None,
            }))
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for e in evaluated {
        match e {
            Ok(row) if rows.len() < cfg.n_train + cfg.n_holdout => rows.push(row),
            Ok(_) => {}
            Err(n) => {
                if rows.len() < cfg.n_train + cfg.n_holdout {
                    skipped.push(n)
                }
            }
        }
    }
    let n_train = cfg.n_train.min(rows.len());
    let max_train_ratio = rows[..n_train].iter().map(|r| r.ratio).fold(0.0f64, f64::max);
    let fitted_c = max_train_ratio * (1.0 + cfg.margin);
    let mut holdout_violations = 0;
    for (k, row) in rows.iter_mut().enumerate() {
        if k < n_train {
            row.set = "train".into();
        } else {
            row.set = "holdout".into();
            let ok = row.excess <= fitted_c * row.norm_diff;
            holdout_violations += usize::from(!ok);
            row.within_bound = Some(ok);
        }
    }
    let (slope_rows, slope) = slope_sweep(grid, &phi, &cfg.slope_scales)?;
    let slope_ok = (slope - 1.0).abs() <= cfg.slope_tol;
    let enough = rows.len() == cfg.n_train + cfg.n_holdout;
    Ok(GluingReport {
        config: cfg.clone(),
        realized_m: phi.m,
        max_train_ratio,
        fitted_c,
        rows,
        skipped,
        holdout_violations,
        slope_rows,
        slope,
        slope_ok,
        passed: enough && holdout_violations == 0 && slope_ok,
    })
}

/// Base height of the slope sweep.
pub fn slope_base(x: f64, y: f64) -> CartJet {
    let u = 0.2 * x * x * y - 0.15 * x * y + 0.1 * y * y;
    [u, 0.4 * x * y - 0.15 * y, 0.2 * x * x - 0.15 * x + 0.2 * y, 0.4 * y, 0.4 * x - 0.15, 0.2]
}

/// Amplitude of the bump added in the slope sweep.
pub const SLOPE_BUMP_AMPLITUDE: f64 = -1e-3;

/// Gaussian bump centered on the unit circle at `(1, 0)`.
pub fn slope_bump(x: f64, y: f64) -> CartJet {
    let s2 = 0.05;
    let a = SLOPE_BUMP_AMPLITUDE;
    let (dx, dy) = (x - 1.0, y);
    let g = a * (-(dx * dx + dy * dy) / (2.0 * s2)).exp();
    let (gx, gy) = (-dx / s2 * g, -dy / s2 * g);
    [g, gx, gy, (dx * dx / (s2 * s2) - 1.0 / s2) * g, dx * dy / (s2 * s2) * g, (dy * dy / (s2 * s2) - 1.0 / s2) * g]
}

/// Excess of `(u₁, u₂) = (p, p + c·B)` for each scale `c` and the least
/// squares slope of `log |excess|` against `log ‖u₂ − u₁‖_{C²}`.
pub fn slope_sweep(grid: PolarGrid, phi: &GluingProfile, scales: &[f64]) -> Result<(Vec<SlopeRow>, f64)> {
    let u1 = AnnulusGraph::from_cartesian(grid, slope_base)?;
    let rows: Vec<SlopeRow> = scales
        .par_iter()
        .map(|&c| -> Result<SlopeRow> {
            let u2 = AnnulusGraph::from_cartesian(grid, |x, y| {
                let (a, b) = (slope_base(x, y), slope_bump(x, y));
                std::array::from_fn(|k| a[k] + c * b[k])
            })?;
            let nd = AnnulusGraph::difference(&u2, &u1)?.c2_norm();
            let (ex, _, _) = excess(&u1, &u2, phi)?;
            Ok(SlopeRow { scale: c, norm_diff: nd, excess: ex })
        })
        .collect::<Result<_>>()?;
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.norm_diff.ln(), r.excess.abs().ln())).collect();
    Ok((rows, ls_slope(&pts)))
}

/// Least-squares slope through `(x, y)` points.
pub fn ls_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}
