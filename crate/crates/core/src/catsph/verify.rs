//! Parameter sweeps over catenoid spheres: shrinking monotonicity, limits
//! and band-energy scalings.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{catsph_energy, glue_energy, glue_energy_dlambda, w_cap, CatSphParams, Kind};
use crate::error::Result;
use crate::gluing::GluingProfile;

/// One row of a parameter sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub lambda: f64,
    #[serde(rename = "R")]
    pub radius: f64,
    pub delta: f64,
    pub kind: Kind,
    #[serde(rename = "W_cap")]
    pub w_cap: f64,
    #[serde(rename = "W_glue")]
    pub w_glue: f64,
    #[serde(rename = "W_neck")]
    pub w_neck: f64,
    #[serde(rename = "W_total")]
    pub w_total: f64,
    pub err: f64,
    pub status: String,
}

/// Energies over a `λ × δ` grid on the family `R = λ`. Invalid cells keep
/// their row with a status message and NaN energies.
pub fn sweep(kind: Kind, lambdas: &[f64], deltas: &[f64]) -> Vec<SweepRow> {
    let cells: Vec<(f64, f64)> = deltas.iter().flat_map(|&d| lambdas.iter().map(move |&l| (l, d))).collect();
    cells
        .par_iter()
        .map(|&(lambda, delta)| {
            let res = CatSphParams { lambda, radius: lambda, delta, kind };
            let e = res.validate(true).and_then(|_| catsph_energy(&res, None));
            match e {
                Ok(b) => SweepRow {
                    lambda,
                    radius: lambda,
                    delta,
                    kind,
                    w_cap: b.cap.value,
                    w_glue: b.glue.value,
                    w_neck: b.neck.value,
                    w_total: b.total.value,
                    err: b.cap.error + b.glue.error + b.neck.error,
                    status: "ok".into(),
                },
                Err(e) => SweepRow {
                    lambda,
                    radius: lambda,
                    delta,
                    kind,
                    w_cap: f64::NAN,
                    w_glue: f64::NAN,
                    w_neck: f64::NAN,
                    w_total: f64::NAN,
                    err: f64::NAN,
                    status: e.to_string(),
                },
            }
        })
        .collect()
}

/// Sweep rows as CSV text with header
/// `lambda,R,delta,kind,W_cap,W_glue,W_neck,W_total,err,status`.
pub fn sweep_csv(rows: &[SweepRow]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(["lambda", "R", "delta", "kind", "W_cap", "W_glue", "W_neck", "W_total", "err", "status"])?;
    for r in rows {
        w.write_record([
            format!("{:?}", r.lambda),
            format!("{:?}", r.radius),
            format!("{:?}", r.delta),
            r.kind.to_string(),
            format!("{:?}", r.w_cap),
            format!("{:?}", r.w_glue),
            format!("{:?}", r.w_neck),
            format!("{:?}", r.w_total),
            format!("{:?}", r.err),
            r.status.clone(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| crate::Error::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn total(lambda: f64, delta: f64, kind: Kind) -> Result<f64> {
    Ok(catsph_energy(&CatSphParams::symmetric(lambda, delta, kind)?, None)?.total.value)
}

/// Grids for the shrinking checks on the tangent family `R = λ`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ShrinkingConfig {
    /// Monotonicity grid in `λ`, per `δ` in `monotone_deltas`.
    pub monotone_lambdas: Vec<f64>,
    pub monotone_deltas: Vec<f64>,
    /// Extra `λ` values below the grid used to locate the monotone onset.
    pub onset_scan: Vec<f64>,
    pub limit_lambda: f64,
    pub limit_deltas: Vec<f64>,
    /// Required gap to the closed form at the smallest `δ`.
    pub limit_tol: f64,
    pub large_lambdas: Vec<f64>,
    pub large_delta: f64,
    /// Required `|W_β − 4π|` at the largest `λ`.
    pub large_tol: f64,
}

impl Default for ShrinkingConfig {
    fn default() -> Self {
        ShrinkingConfig {
            monotone_lambdas: (2..=20).map(|k| 10.0 * k as f64).collect(),
            monotone_deltas: vec![0.1],
            onset_scan: vec![1.5, 2.0, 3.0, 4.0, 5.0, 6.0, 8.0, 10.0, 12.0, 15.0],
            limit_lambda: 10.0,
            limit_deltas: vec![1e-1, 1e-2, 1e-3],
            limit_tol: 1e-3,
            large_lambdas: vec![10.0, 100.0, 1000.0],
            large_delta: 0.1,
            large_tol: 0.01,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MonotoneSeries {
    pub delta: f64,
    pub lambdas: Vec<f64>,
    pub energies: Vec<f64>,
    pub forward_differences: Vec<f64>,
    pub all_increasing: bool,
    /// Smallest `λ` of the scan from which every later forward difference
    /// on the scan is positive.
    pub onset_lambda: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LimitRow {
    pub delta: f64,
    pub energy: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LargeRow {
    pub lambda: f64,
    pub w_alpha: f64,
    pub w_beta: f64,
    pub alpha_gap: f64,
    pub beta_gap: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShrinkingReport {
    pub config: ShrinkingConfig,
    pub monotone: Vec<MonotoneSeries>,
    pub closed_form: f64,
    pub closed_form_below_4pi: bool,
    pub limit_rows: Vec<LimitRow>,
    pub limit_gaps_decrease: bool,
    pub limit_final_ok: bool,
    pub large_rows: Vec<LargeRow>,
    pub alpha_above_4pi: bool,
    pub alpha_gap_decreases: bool,
    pub beta_large_ok: bool,
    pub counterexamples: Vec<String>,
    pub passed: bool,
}

/// Forward-difference monotonicity in `λ`, the `δ → 0` limit and the
/// `λ → ∞` limit for both kinds.
pub fn verify_shrinking(cfg: &ShrinkingConfig) -> Result<ShrinkingReport> {
    let mut counterexamples = Vec::new();
    let mut monotone = Vec::new();
    for &delta in &cfg.monotone_deltas {
        let lambdas = cfg.monotone_lambdas.clone();
        let energies: Vec<f64> = lambdas.par_iter().map(|&l| total(l, delta, Kind::Beta)).collect::<Result<_>>()?;
        let fd: Vec<f64> = energies.windows(2).map(|w| w[1] - w[0]).collect();
        for (k, d) in fd.iter().enumerate() {
            if !(*d > 0.0) {
                counterexamples.push(format!(
                    "δ={delta}: W_β decreases from λ={} to λ={} by {:.3e}",
                    lambdas[k],
                    lambdas[k + 1],
                    -d
                ));
            }
        }
        let mut scan: Vec<f64> = cfg
            .onset_scan
            .iter()
            .copied()
            .filter(|&l| l < lambdas[0] && delta < 1.0 - 1.0 / l)
            .collect();
        let scan_e: Vec<f64> = scan.par_iter().map(|&l| total(l, delta, Kind::Beta)).collect::<Result<_>>()?;
        scan.extend(lambdas.iter().copied());
        let all_e: Vec<f64> = scan_e.into_iter().chain(energies.iter().copied()).collect();
        let mut onset = None;
        for k in (0..scan.len()).rev() {
            if k + 1 < scan.len() && !(all_e[k + 1] > all_e[k]) {
                break;
            }
            onset = Some(scan[k]);
        }
        monotone.push(MonotoneSeries {
            delta,
            lambdas,
            all_increasing: fd.iter().all(|d| *d > 0.0),
            energies,
            forward_differences: fd,
            onset_lambda: onset,
        });
    }

    let closed_form = w_cap(cfg.limit_lambda, 0.0);
    let limit_rows: Vec<LimitRow> = cfg
        .limit_deltas
        .par_iter()
        .map(|&d| {
            let e = total(cfg.limit_lambda, d, Kind::Beta)?;
            Ok(LimitRow { delta: d, energy: e, gap: (e - closed_form).abs() })
        })
        .collect::<Result<_>>()?;
    let limit_gaps_decrease = limit_rows.windows(2).all(|w| w[1].gap < w[0].gap);
    let limit_final_ok = limit_rows.last().is_some_and(|r| r.gap < cfg.limit_tol);
    if !limit_gaps_decrease {
        counterexamples.push(format!("λ={}: gap to the δ=0 value does not decrease", cfg.limit_lambda));
    }

    let large_rows: Vec<LargeRow> = cfg
        .large_lambdas
        .par_iter()
        .map(|&l| {
            let a = total(l, cfg.large_delta, Kind::Alpha)?;
            let b = total(l, cfg.large_delta, Kind::Beta)?;
            Ok(LargeRow { lambda: l, w_alpha: a, w_beta: b, alpha_gap: a - 4.0 * PI, beta_gap: (b - 4.0 * PI).abs() })
        })
        .collect::<Result<_>>()?;
    let alpha_above_4pi = large_rows.iter().all(|r| r.alpha_gap > 0.0);
    let alpha_gap_decreases = large_rows.windows(2).all(|w| w[1].alpha_gap < w[0].alpha_gap);
    let beta_large_ok = large_rows.last().is_some_and(|r| r.beta_gap < cfg.large_tol);
    for r in &large_rows {
        if r.alpha_gap <= 0.0 {
            counterexamples.push(format!("λ={}: W_α = {} is not above 4π", r.lambda, r.w_alpha));
        }
    }
    let closed_form_below_4pi = closed_form < 4.0 * PI;
    let passed = monotone.iter().all(|m| m.all_increasing)
        && closed_form_below_4pi
        && limit_gaps_decrease
        && limit_final_ok
        && alpha_above_4pi
        && alpha_gap_decreases
        && beta_large_ok;
    Ok(ShrinkingReport {
        config: cfg.clone(),
        monotone,
        closed_form,
        closed_form_below_4pi,
        limit_rows,
        limit_gaps_decrease,
        limit_final_ok,
        large_rows,
        alpha_above_4pi,
        alpha_gap_decreases,
        beta_large_ok,
        counterexamples,
        passed,
    })
}

/// Grids for the band-energy scaling checks.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct GlueScalingConfig {
    pub lambdas: Vec<f64>,
    pub deltas: Vec<f64>,
    /// Largest allowed max/min ratio of each scaled quantity over the grid.
    pub max_spread: f64,
}

impl Default for GlueScalingConfig {
    fn default() -> Self {
        GlueScalingConfig { lambdas: vec![20.0, 50.0, 100.0, 200.0], deltas: vec![0.05, 0.1, 0.2], max_spread: 4.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GlueScalingRow {
    pub lambda: f64,
    pub delta: f64,
    pub glue_alpha: f64,
    pub glue_beta: f64,
    pub dglue_beta: f64,
    /// `W^glue_α · δ λ²`.
    pub scaled_alpha: f64,
    /// `W^glue_β · λ² / δ`.
    pub scaled_beta: f64,
    /// `∂λ W^glue_β · λ³ / δ`.
    pub scaled_dbeta: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Spread {
    pub min: f64,
    pub max: f64,
    pub ratio: f64,
}

impl Spread {
    fn of(v: impl Iterator<Item = f64>) -> Spread {
        let (min, max) = v.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
        Spread { min, max, ratio: max / min }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GlueScalingReport {
    pub config: GlueScalingConfig,
    pub rows: Vec<GlueScalingRow>,
    pub alpha: Spread,
    pub beta: Spread,
    pub dbeta: Spread,
    /// Empirical constants: `max` of the scaled α and β energies and
    /// `−min` of the scaled derivative (zero when it is nonnegative).
    pub c_alpha: f64,
    pub c_beta: f64,
    pub c_dbeta: f64,
    pub alpha_ok: bool,
    pub beta_ok: bool,
    pub dbeta_ok: bool,
    pub passed: bool,
}

/// Scaled band energies `W^glue_α δλ²`, `W^glue_β λ²/δ` and
/// `∂λW^glue_β λ³/δ` over the grid.
pub fn verify_glue_scaling(cfg: &GlueScalingConfig) -> Result<GlueScalingReport> {
    let cells: Vec<(f64, f64)> = cfg.deltas.iter().flat_map(|&d| cfg.lambdas.iter().map(move |&l| (l, d))).collect();
    let rows: Vec<GlueScalingRow> = cells
        .par_iter()
        .map(|&(lambda, delta)| {
            let phi = GluingProfile::new(delta)?;
            let ga = glue_energy(&CatSphParams::symmetric(lambda, delta, Kind::Alpha)?, &phi)?.value;
            let gb = glue_energy(&CatSphParams::symmetric(lambda, delta, Kind::Beta)?, &phi)?.value;
            let db = glue_energy_dlambda(lambda, delta, Kind::Beta, &phi)?;
            Ok(GlueScalingRow {
                lambda,
                delta,
                glue_alpha: ga,
                glue_beta: gb,
                dglue_beta: db,
                scaled_alpha: ga * delta * lambda * lambda,
                scaled_beta: gb * lambda * lambda / delta,
                scaled_dbeta: db * lambda.powi(3) / delta,
            })
        })
        .collect::<Result<_>>()?;
    let alpha = Spread::of(rows.iter().map(|r| r.scaled_alpha));
    let beta = Spread::of(rows.iter().map(|r| r.scaled_beta));
    let dbeta = Spread::of(rows.iter().map(|r| r.scaled_dbeta));
    let c_dbeta = (-dbeta.min).max(0.0);
    let alpha_ok = alpha.min > 0.0 && alpha.ratio <= cfg.max_spread;
    let beta_ok = beta.min > 0.0 && beta.ratio <= cfg.max_spread;
    let dbeta_ok = dbeta.min.is_finite() && rows.iter().all(|r| r.scaled_dbeta >= -c_dbeta);
    Ok(GlueScalingReport {
        config: cfg.clone(),
        c_alpha: alpha.max,
        c_beta: beta.max,
        c_dbeta,
        alpha,
        beta,
        dbeta,
        alpha_ok,
        beta_ok,
        dbeta_ok,
        passed: alpha_ok && beta_ok && dbeta_ok,
        rows,
    })
}
