//! Two-sphere model surfaces on a catenoid neck, energy traces along the
//! shrinking path, and the turning-number segment bound.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catsph::{catsph_chain, catsph_energy, piece_quad, CatSphParams, EnergyBreakdown, Kind, DEFAULT_SAMPLES};
use crate::error::{Error, Result};
use crate::gluing::GluingProfile;
use crate::numerics::quad::{partial_integral, Integral};
use crate::profile::lift::TangentLift;
use crate::profile::ProfileCurve;
use crate::segments::{Chain, SampleSpec, Segment};

/// Attachment kinds at the lower and upper catenoid ends with shared `λ`
/// and `δ` and one sphere radius per end.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttachmentConfig {
    pub kinds: (Kind, Kind),
    pub lambda: f64,
    pub delta: f64,
    pub radii: (f64, f64),
}

impl AttachmentConfig {
    pub fn new(kinds: (Kind, Kind), lambda: f64, delta: f64, radii: (f64, f64)) -> Result<Self> {
        let c = AttachmentConfig { kinds, lambda, delta, radii };
        c.ends()?;
        Ok(c)
    }

    /// Both radii equal to `λ`.
    pub fn symmetric(kinds: (Kind, Kind), lambda: f64, delta: f64) -> Result<Self> {
        Self::new(kinds, lambda, delta, (lambda, lambda))
    }

    /// Lower and upper catenoid-sphere parameters.
    pub fn ends(&self) -> Result<(CatSphParams, CatSphParams)> {
        Ok((
            CatSphParams::new(self.lambda, self.radii.0, self.delta, self.kinds.0)?,
            CatSphParams::new(self.lambda, self.radii.1, self.delta, self.kinds.1)?,
        ))
    }
}

/// Catenoid-sphere chain moved so that its waist sits at height zero and
/// scaled by `sigma`.
fn upper_half(p: &CatSphParams, phi: &GluingProfile, sigma: f64) -> Result<Chain> {
    Ok(catsph_chain(p, phi)?.shifted(p.t0()).scaled(sigma))
}

/// Pole-to-pole chain: the lower end is the mirror image of a catenoid
/// sphere, traversed towards the waist, followed by the upper end. Each end
/// is scaled by `λ_i / λ_lower` so that both necks share the waist radius.
pub fn composite_chain(lower: &CatSphParams, upper: &CatSphParams, phi: &GluingProfile) -> Result<Chain> {
    let lo = upper_half(lower, phi, 1.0)?.mirrored().reversed();
    let hi = upper_half(upper, phi, upper.lambda / lower.lambda)?;
    lo.then(hi)
}

pub fn model_chain(cfg: &AttachmentConfig, phi: &GluingProfile) -> Result<Chain> {
    let (a, b) = cfg.ends()?;
    composite_chain(&a, &b, phi)
}

fn sample_closed(chain: &Chain, n: usize) -> Result<ProfileCurve> {
    let c = chain.sample(SampleSpec::new(n))?;
    let mut c = ProfileCurve { closed_on_axis: (true, true), ..c };
    let last = c.len() - 1;
    c.r[0] = 0.0;
    c.r[last] = 0.0;
    Ok(c)
}

/// Sampled model profile, closed on the axis at both ends.
pub fn assemble_model(cfg: &AttachmentConfig, phi: &GluingProfile) -> Result<ProfileCurve> {
    assemble_model_with(cfg, phi, 2 * DEFAULT_SAMPLES - 1)
}

pub fn assemble_model_with(cfg: &AttachmentConfig, phi: &GluingProfile, n: usize) -> Result<ProfileCurve> {
    let c = sample_closed(&model_chain(cfg, phi)?, n)?;
    Ok(c.with_meta("model", format!("{},{}", cfg.kinds.0, cfg.kinds.1))
        .with_meta("lambda", cfg.lambda.to_string())
        .with_meta("delta", cfg.delta.to_string()))
}

/// Energy of a model as the sum of its two catenoid-sphere halves.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelEnergy {
    pub lower: EnergyBreakdown,
    pub upper: EnergyBreakdown,
    pub total: Integral,
}

pub fn model_energy(cfg: &AttachmentConfig, phi: &GluingProfile) -> Result<ModelEnergy> {
    let (a, b) = cfg.ends()?;
    let lower = catsph_energy(&a, Some(phi))?;
    let upper = catsph_energy(&b, Some(phi))?;
    Ok(ModelEnergy { total: lower.total + upper.total, lower, upper })
}

/// Three spheres joined by two necks, all attachments of type α with
/// `R = λ`. The middle sphere carries both necks at mirror-image points.
pub fn triple_bubble_chain(lambda: f64, delta: f64, phi: &GluingProfile) -> Result<Chain> {
    let p = CatSphParams::symmetric(lambda, delta, Kind::Alpha)?;
    let e = upper_half(&p, phi, 1.0)?;
    let first = e.mirrored().reversed();
    let neck_glue = Chain::new(e.segments[..2].to_vec())?;
    // centre of the middle sphere
    let cu = p.t0() + p.sphere_center();
    let ts = ((1.0 + delta) / lambda).asin();
    let arc = Chain::new(vec![Segment::circle(crate::catsph::CAP, lambda, cu, ts, PI - ts).reversed()])?;
    let down = neck_glue.mirrored().shifted(2.0 * cu).reversed();
    let last = e.shifted(2.0 * cu);
    first.then(neck_glue)?.then(arc)?.then(down)?.then(last)
}

pub fn triple_bubble(lambda: f64, delta: f64, phi: &GluingProfile) -> Result<ProfileCurve> {
    let c = sample_closed(&triple_bubble_chain(lambda, delta, phi)?, 3 * DEFAULT_SAMPLES - 2)?;
    Ok(c.with_meta("model", "triple").with_meta("lambda", lambda.to_string()).with_meta("delta", delta.to_string()))
}

/// `W_β(λ_t, λ_t, δ)` along `λ_t = (1 − t)λ_start + tΛ_end`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HomotopyTrace {
    pub delta: f64,
    pub lambda_start: f64,
    pub lambda_end: f64,
    pub times: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub energies: Vec<f64>,
    /// Every forward difference in `t` is `≤ 0`.
    pub monotone: bool,
    /// Smallest `λ` of the onset scan above which `W_β` increases in `λ`.
    pub onset_lambda: Option<f64>,
    pub warnings: Vec<String>,
}

/// Candidate `λ` values used to locate the monotone onset.
pub const ONSET_SCAN: [f64; 12] = [1.5, 2.0, 3.0, 4.0, 5.0, 6.0, 8.0, 10.0, 12.0, 15.0, 20.0, 30.0];

fn w_beta(lambda: f64, delta: f64) -> Result<f64> {
    Ok(catsph_energy(&CatSphParams::symmetric(lambda, delta, Kind::Beta)?, None)?.total.value)
}

/// Smallest scan value from which `λ ↦ W_β(λ, λ, δ)` increases along the
/// rest of the scan (the scan is extended by `extra`).
pub fn monotone_onset(delta: f64, extra: &[f64]) -> Result<Option<f64>> {
    let mut scan: Vec<f64> = ONSET_SCAN.iter().chain(extra).copied().filter(|&l| delta < 1.0 - 1.0 / l).collect();
    scan.sort_by(f64::total_cmp);
    scan.dedup();
    let w: Vec<f64> = scan.par_iter().map(|&l| w_beta(l, delta)).collect::<Result<_>>()?;
    let mut onset = None;
    for k in (0..scan.len()).rev() {
        if k + 1 < scan.len() && !(w[k + 1] > w[k]) {
            break;
        }
        onset = Some(scan[k]);
    }
    Ok(onset)
}

pub fn shrinking_trace(lambda_start: f64, lambda_end: f64, delta: f64, steps: usize) -> Result<HomotopyTrace> {
    if !(lambda_start >= lambda_end) || steps == 0 {
        return Err(Error::Parameter(format!(
            "shrinking trace needs λ_start ≥ Λ_end and steps ≥ 1 (got {lambda_start}, {lambda_end}, {steps})"
        )));
    }
    let times: Vec<f64> = (0..=steps).map(|k| k as f64 / steps as f64).collect();
    let lambdas: Vec<f64> = times.iter().map(|&t| lambda_start + t * (lambda_end - lambda_start)).collect();
    let energies: Vec<f64> = lambdas.par_iter().map(|&l| w_beta(l, delta)).collect::<Result<_>>()?;
    let monotone = energies.windows(2).all(|w| w[1] - w[0] <= 0.0);
    let onset_lambda = monotone_onset(delta, &[lambda_end, lambda_start])?;
    let mut warnings = Vec::new();
    match onset_lambda {
        Some(o) if lambda_end >= o => {}
        Some(o) => warnings.push(format!("Λ_end = {lambda_end} is below the empirical monotone onset λ = {o}")),
        None => warnings.push(format!("no monotone onset found for δ = {delta} up to λ = {lambda_start}")),
    }
    if !monotone {
        warnings.push("energy increases somewhere along the trace".into());
    }
    Ok(HomotopyTrace { delta, lambda_start, lambda_end, times, lambdas, energies, monotone, onset_lambda, warnings })
}

impl HomotopyTrace {
    /// CSV with header `t,lambda_t,W`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(["t", "lambda_t", "W"])?;
        for k in 0..self.times.len() {
            w.write_record([
                format!("{:?}", self.times[k]),
                format!("{:?}", self.lambdas[k]),
                format!("{:?}", self.energies[k]),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn end_energy(&self) -> f64 {
        *self.energies.last().expect("trace has samples")
    }
}

/// One end of a composite after the shrinking step.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompositeEnd {
    pub kind: Kind,
    pub lambda: f64,
    pub energy: f64,
    pub shrunk: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompositeReport {
    /// `4π − W_β(Λ, Λ, δ)`; not assumed positive.
    pub epsilon: f64,
    pub ends: [CompositeEnd; 2],
    pub total: f64,
    /// Quadrature of the assembled composite profile.
    pub profile_energy: f64,
    pub bound: f64,
    pub below_bound: bool,
    pub violation: Option<String>,
}

/// Total energy after every β end of `cfg` is shrunk to the end of
/// `trace`. α ends stay at `cfg.lambda`; the bound `8π` is only expected
/// when each α end satisfies `W_α < 4π + ε`. A violated bound is reported,
/// never hidden.
pub fn composite_energy_after_shrink(cfg: &AttachmentConfig, trace: &HomotopyTrace) -> Result<CompositeReport> {
    if cfg.kinds == (Kind::Alpha, Kind::Alpha) {
        return Err(Error::Parameter("composite shrinking needs at least one β end".into()));
    }
    if cfg.delta != trace.delta {
        return Err(Error::Parameter(format!("trace δ = {} differs from model δ = {}", trace.delta, cfg.delta)));
    }
    let big_lambda = trace.lambda_end;
    let epsilon = 4.0 * PI - trace.end_energy();
    let phi = GluingProfile::new(cfg.delta)?;
    let (a, b) = cfg.ends()?;
    let mut params = [a, b];
    for p in params.iter_mut() {
        if p.kind == Kind::Beta {
            *p = CatSphParams::symmetric(big_lambda, cfg.delta, Kind::Beta)?;
        }
    }
    let mut ends = Vec::new();
    let mut violation = None;
    for p in &params {
        let e = catsph_energy(p, Some(&phi))?.total.value;
        if p.kind == Kind::Alpha && !(e < 4.0 * PI + epsilon) {
            violation = Some(format!(
                "α end at λ = {} has W = {e:.9} ≥ 4π + ε = {:.9}; choose a larger λ",
                p.lambda,
                4.0 * PI + epsilon
            ));
        }
        ends.push(CompositeEnd { kind: p.kind, lambda: p.lambda, energy: e, shrunk: p.kind == Kind::Beta });
    }
    let total = ends[0].energy + ends[1].energy;
    let curve = sample_closed(&composite_chain(&params[0], &params[1], &phi)?, 2 * DEFAULT_SAMPLES - 1)?;
    let profile_energy = curve.willmore_energy()?.total.value;
    let bound = 8.0 * PI;
    let below_bound = total < bound;
    if !below_bound && violation.is_none() {
        violation = Some(format!("composite energy {total:.9} is not below 8π"));
    }
    let [e0, e1]: [CompositeEnd; 2] = ends.try_into().expect("two ends");
    Ok(CompositeReport { epsilon, ends: [e0, e1], total, profile_energy, bound, below_bound, violation })
}

/// Smallest `λ = λ_min · 2^k` with `W_α(λ, λ, δ) < 4π + ε`.
pub fn alpha_lambda_for(epsilon: f64, delta: f64, lambda_min: f64) -> Result<f64> {
    let mut l = lambda_min;
    for _ in 0..40 {
        let w = catsph_energy(&CatSphParams::symmetric(l, delta, Kind::Alpha)?, None)?.total.value;
        if w < 4.0 * PI + epsilon {
            return Ok(l);
        }
        l *= 2.0;
    }
    Err(Error::Domain(format!("no λ up to {l} gives W_α < 4π + {epsilon}")))
}

/// One closed-up piece of the turning-number decomposition.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TurningSegment {
    pub index: usize,
    pub interior: bool,
    pub s_start: f64,
    pub s_end: f64,
    /// Energy of the curve piece alone.
    pub energy: f64,
    /// Energy of the attached quarter circles, by quadrature.
    pub cap_energy: f64,
    pub closed_energy: f64,
    /// `4π` for interior pieces, `2π` for the two end pieces.
    pub bound: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TurningBoundReport {
    pub tau: f64,
    /// The curve was reversed to make `τ` positive.
    pub reversed: bool,
    /// Arclength parameters of the first crossings of `2πl + π/2`.
    pub crossings: Vec<f64>,
    pub segments: Vec<TurningSegment>,
    pub energy: f64,
    pub energy_error: f64,
    /// `4π(|τ| + 1/2)`.
    pub bound: f64,
    pub gap: f64,
    pub tol: f64,
    pub global_ok: bool,
    /// `|W − bound| ≤ tol`, the equality case of the round sphere.
    pub boundary_case: bool,
    pub passed: bool,
}

/// Relative slack of the turning-bound checks on top of the quadrature
/// error estimate.
pub const TURNING_REL_SLACK: f64 = 1e-6;

fn quarter(r0: f64, h0: f64, lower: bool) -> Segment {
    if lower {
        Segment::circle("quarter", r0, h0, 0.0, 0.5 * PI)
    } else {
        Segment::circle("quarter", r0, h0, 0.5 * PI, PI)
    }
}

/// Integral of the sampled density between two arclength parameters,
/// piece by piece.
fn energy_between(curve: &ProfileCurve, density: &[f64], a: f64, b: f64) -> f64 {
    let mut bounds = vec![0];
    bounds.extend(curve.breaks.iter().copied());
    bounds.push(curve.len() - 1);
    let mut total = 0.0;
    for w in bounds.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let (x0, x1) = (curve.s[lo], curve.s[hi]);
        let (p, q) = (a.max(x0), b.min(x1));
        if q > p {
            total += partial_integral(&curve.s[lo..=hi], &density[lo..=hi], p, q);
        }
    }
    total
}

/// Splits the profile at the first crossings of the tangent lift through
/// `2πl + π/2`, closes each piece with quarter circles and checks the piece
/// bounds and the global bound `W ≥ 4π(|τ| + 1/2)`.
pub fn turning_bound_report(curve: &ProfileCurve) -> Result<TurningBoundReport> {
    if curve.closed_on_axis != (true, true) {
        return Err(Error::Parameter("turning bound needs a profile closed on the axis at both ends".into()));
    }
    curve.check_axis_contact(1e-3)?;
    let mut lift = TangentLift::compute(curve)?;
    let reversed = lift.tau < 0.0;
    let work = if reversed { curve.reversed() } else { curve.clone() };
    if reversed {
        lift = TangentLift::compute(&work)?;
    }
    // start angle is a multiple of 2π for an outward perpendicular start
    let base = 2.0 * PI * (lift.theta[0] / (2.0 * PI)).round();
    for t in lift.theta.iter_mut() {
        *t -= base;
    }
    let tau = lift.tau_half_integer();
    let k = (tau - 0.5).round().max(0.0) as usize;
    let mut crossings = Vec::with_capacity(k + 1);
    for l in 0..=k {
        let level = 2.0 * PI * l as f64 + 0.5 * PI;
        let s = lift.first_crossing(level).ok_or(Error::RefinementRequired { index: l, jump: level })?;
        crossings.push(s);
    }
    let energy = work.willmore_energy()?;
    let pt = |s: f64| {
        (
            crate::numerics::quad::interp_cubic(&work.s, &work.r, s),
            crate::numerics::quad::interp_cubic(&work.s, &work.h, s),
        )
    };
    let q = piece_quad();
    let bound = 4.0 * PI * (tau.abs() + 0.5);
    let tol = energy.total.error.abs() + TURNING_REL_SLACK * bound;
    let n = work.len();
    let mut cuts = vec![work.s[0]];
    cuts.extend(crossings.iter().copied());
    cuts.push(work.s[n - 1]);
    let mut segments = Vec::new();
    for i in 0..cuts.len() - 1 {
        let (a, b) = (cuts[i], cuts[i + 1]);
        let e = energy_between(&work, &energy.density, a, b);
        let mut cap = 0.0;
        if i > 0 {
            let (r0, h0) = pt(a);
            cap += quarter(r0, h0, true).energy(q).value;
        }
        if i + 1 < cuts.len() - 1 {
            let (r0, h0) = pt(b);
            cap += quarter(r0, h0, false).energy(q).value;
        }
        let interior = i > 0 && i + 1 < cuts.len() - 1;
        let seg_bound = if interior { 4.0 * PI } else { 2.0 * PI };
        let seg_tol = energy.total.error.abs() + TURNING_REL_SLACK * seg_bound;
        segments.push(TurningSegment {
            index: i,
            interior,
            s_start: a,
            s_end: b,
            energy: e,
            cap_energy: cap,
            closed_energy: e + cap,
            bound: seg_bound,
            ok: e >= seg_bound - seg_tol,
        });
    }
    let w = energy.total.value;
    let global_ok = w > bound - tol;
    let boundary_case = (w - bound).abs() <= tol;
    Ok(TurningBoundReport {
        tau,
        reversed,
        crossings,
        passed: global_ok && segments.iter().all(|s| s.ok),
        segments,
        energy: w,
        energy_error: energy.total.error,
        bound,
        gap: w - bound,
        tol,
        global_ok,
        boundary_case,
    })
}
