//! Energy-monotone discrete Willmore flow of axis-closed profiles.
//!
//! Nodes move normally along `−M⁻¹∇E`, where `E` is the polygonal energy of [`discrete`]
//! and `M` the lumped `2πr` mass, discretized by a linearly implicit Euler
//! step. Steps are accepted by a backtracking line search on `E`. Remeshing equidistributes a blend of
//! arclength and profile curvature.

pub mod discrete;
pub mod implicit;
pub mod neck;

use std::collections::VecDeque;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

pub use discrete::{discrete_energy, discrete_gradient, lumped_mass, Discretization};
pub use neck::{locate_neck, neck_diagnostic, NeckDiagnostic, NeckLocation, NOT_A_NECK};

use crate::error::{Error, Result};
use crate::numerics::quad::lagrange;
use crate::profile::lift::TangentLift;
use crate::profile::ProfileCurve;

/// Time steps never exceed this multiple of `diameter⁴`.
pub const DT_MAX_REL: f64 = 1e6;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct FlowControls {
    /// Initial time step; `None` picks `1e-3 · min spacing⁴` of the initial
    /// curve in units of its diameter.
    pub dt0: Option<f64>,
    pub max_steps: usize,
    pub max_retries: usize,
    pub grow: f64,
    /// Reject a trial moving any node further than this fraction of its
    /// shorter adjacent edge.
    pub max_move: f64,
    /// Accept a trial when `E_new ≤ E_old + accept_tol`.
    pub accept_tol: f64,
    /// Remesh when the spacing ratio relative to the last remesh exceeds
    /// this value.
    pub spacing_ratio: f64,
    /// Remesh when the neck radius falls below this fraction of its value
    /// at the last remesh.
    pub neck_refine: f64,
    /// Share of nodes placed by curvature rather than arclength.
    pub curvature_share: f64,
    /// Singular stop below this neck radius; `None` means `1e-3` times the
    /// initial diameter.
    pub r_floor: Option<f64>,
    /// Converged when `‖M⁻¹∇E‖_M` (relative to the scale of the curve) is
    /// below `grad_tol` and `|W − target| < energy_tol`.
    pub grad_tol: f64,
    pub target: f64,
    pub energy_tol: f64,
    pub neck_halfwidth: f64,
    pub history: usize,
    /// Trajectory rows are recorded every `log_every` accepted steps.
    pub log_every: usize,
}

impl Default for FlowControls {
    fn default() -> Self {
        FlowControls {
            dt0: None,
            max_steps: 100_000,
            max_retries: 60,
            grow: 1.5,
            max_move: 0.2,
            accept_tol: 1e-12,
            spacing_ratio: 3.0,
            neck_refine: 0.9,
            curvature_share: 0.5,
            r_floor: None,
            grad_tol: 1e-4,
            target: 4.0 * PI,
            energy_tol: 1e-3,
            neck_halfwidth: 3.0,
            history: 32,
            log_every: 100,
        }
    }
}

/// Snapshot of a trajectory. Cloning is cheap enough for logging; states
/// are plain data and may be sent between threads.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlowState {
    pub profile: ProfileCurve,
    pub step: usize,
    pub time: f64,
    pub dt: f64,
    pub energy: f64,
    pub neck: NeckLocation,
    pub tau: f64,
    /// Recent `(t, W, r_min)` triples, newest last.
    pub history: VecDeque<(f64, f64, f64)>,
    /// Segment lengths right after the last remesh.
    pub ref_spacing: Vec<f64>,
    pub ref_neck: f64,
    pub remeshes: usize,
    /// Sum of the energy changes caused by remeshing.
    pub remesh_jump: f64,
    /// Largest single remesh energy change in absolute value.
    pub max_remesh_jump: f64,
    pub grad_norm: f64,
}

fn spacings(r: &[f64], h: &[f64]) -> Vec<f64> {
    (0..r.len() - 1).map(|i| (r[i + 1] - r[i]).hypot(h[i + 1] - h[i])).collect()
}

/// Same nodes on a uniform parameter grid over `[0, polygon length]`.
pub fn uniform_parameter(c: &ProfileCurve) -> Result<ProfileCurve> {
    let n = c.len();
    let total: f64 = spacings(&c.r, &c.h).iter().sum();
    let s = (0..n).map(|i| total * i as f64 / (n - 1) as f64).collect();
    let mut u = ProfileCurve::new(s, c.r.clone(), c.h.clone(), c.closed_on_axis)?;
    u.meta = c.meta.clone();
    Ok(u)
}

fn validate_flow_curve(c: &ProfileCurve) -> Result<()> {
    if c.closed_on_axis != (true, true) {
        return Err(Error::Parameter("the flow needs a profile closed on the axis at both ends".into()));
    }
    Ok(())
}

impl FlowState {
    pub fn new(profile: ProfileCurve, ctrl: &FlowControls) -> Result<FlowState> {
        validate_flow_curve(&profile)?;
        let profile = uniform_parameter(&profile.without_jets())?;
        let disc = Discretization::of(&profile);
        let (energy, gr, gh) = disc.gradient(&profile.r, &profile.h);
        if !energy.is_finite() {
            return Err(Error::Parameter("initial discrete energy is not finite".into()));
        }
        let tau = TangentLift::compute(&profile)?.tau;
        let neck = locate_neck(&profile);
        let sp = spacings(&profile.r, &profile.h);
        let dt = match ctrl.dt0 {
            Some(dt) => dt,
            None => {
                let d = profile.diameter();
                let m = sp.iter().fold(f64::INFINITY, |a, &v| a.min(v)) / d;
                1e-3 * m.powi(4) * d.powi(4)
            }
        };
        let grad_norm = grad_norm(&profile, &gr, &gh);
        let mut history = VecDeque::with_capacity(ctrl.history);
        history.push_back((0.0, energy, neck.r_min));
        Ok(FlowState {
            step: 0,
            time: 0.0,
            dt,
            energy,
            tau,
            history,
            ref_neck: neck.r_min,
            neck,
            ref_spacing: sp,
            remeshes: 0,
            remesh_jump: 0.0,
            max_remesh_jump: 0.0,
            grad_norm,
            profile,
        })
    }

    /// Sign of the least-squares slope of `r_min` over the history.
    pub fn neck_trend(&self) -> Option<f64> {
        let k = self.history.len();
        if k < 3 {
            return None;
        }
        let mt = self.history.iter().map(|x| x.0).sum::<f64>() / k as f64;
        let mr = self.history.iter().map(|x| x.2).sum::<f64>() / k as f64;
        let num: f64 = self.history.iter().map(|x| (x.0 - mt) * (x.2 - mr)).sum();
        Some(if num > 0.0 {
            1.0
        } else if num < 0.0 {
            -1.0
        } else {
            0.0
        })
    }

    pub fn diagnostic(&self, halfwidth: f64) -> NeckDiagnostic {
        neck_diagnostic(&self.profile, halfwidth, self.neck_trend())
    }
}

/// Unit normals of the polygon from central chords; vertical at the axis
/// ends, where the chord is horizontal by symmetry.
fn normals(r: &[f64], h: &[f64]) -> Vec<(f64, f64)> {
    let n = r.len();
    (0..n)
        .map(|i| {
            let (tr, th) = if i == 0 {
                (r[1] - r[0], 0.0)
            } else if i + 1 == n {
                (r[n - 1] - r[n - 2], 0.0)
            } else {
                (r[i + 1] - r[i - 1], h[i + 1] - h[i - 1])
            };
            let l = tr.hypot(th);
            (-th / l, tr / l)
        })
        .collect()
}

/// Normal descent velocity `−(g·ν)ν / m` per node.
fn velocity(c: &ProfileCurve, gr: &[f64], gh: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let m = lumped_mass(&c.r, &c.h);
    let nu = normals(&c.r, &c.h);
    let n = c.len();
    let (mut vr, mut vh) = (vec![0.0; n], vec![0.0; n]);
    for i in 0..n {
        let gn = gr[i] * nu[i].0 + gh[i] * nu[i].1;
        vr[i] = -gn * nu[i].0 / m[i];
        vh[i] = -gn * nu[i].1 / m[i];
    }
    (vr, vh)
}

/// `‖v‖_M` of the descent velocity made scale-free by `diameter²`.
fn grad_norm(c: &ProfileCurve, gr: &[f64], gh: &[f64]) -> f64 {
    let m = lumped_mass(&c.r, &c.h);
    let (vr, vh) = velocity(c, gr, gh);
    let s: f64 = (0..m.len()).map(|i| m[i] * (vr[i] * vr[i] + vh[i] * vh[i])).sum();
    s.sqrt() * c.diameter().powi(2)
}

/// Diagnostic of [`neck_rescale`].
pub fn neck_rescale(state: &FlowState, halfwidth: f64) -> NeckDiagnostic {
    state.diagnostic(halfwidth)
}

/// One accepted descent step followed by a remesh when the spacing has
/// degraded or the neck has thinned.
pub fn flow_step(state: &FlowState, ctrl: &FlowControls) -> Result<FlowState> {
    let c = &state.profile;
    let n = c.len();
    let disc = Discretization::of(c);
    let (e0, gr, gh) = disc.gradient(&c.r, &c.h);
    let mass = lumped_mass(&c.r, &c.h);
    let nu = normals(&c.r, &c.h);
    let sp0 = spacings(&c.r, &c.h);
    let eps = 1e-4 * sp0.iter().fold(f64::INFINITY, |a, &v| a.min(v));
    let local: Vec<f64> = (0..n).map(|i| sp0[i.saturating_sub(1)].min(sp0[i.min(n - 2)])).collect();
    let mut dt = state.dt;
    let mut accepted = None;
    for _ in 0..=ctrl.max_retries {
        let full = implicit::system(&disc, &c.r, &c.h, &mass, dt, eps);
        let Some(fac) = implicit::restrict_normal(&full, &nu).cholesky() else {
            dt *= 0.5;
            continue;
        };
        let rhs: Vec<f64> = (0..n).map(|i| -dt * (gr[i] * nu[i].0 + gh[i] * nu[i].1)).collect();
        let a = fac.solve(&rhs);
        if (0..n).any(|i| a[i].abs() > ctrl.max_move * local[i]) {
            dt *= 0.5;
            continue;
        }
        let r: Vec<f64> = (0..n).map(|i| c.r[i] + a[i] * nu[i].0).collect();
        let h: Vec<f64> = (0..n).map(|i| c.h[i] + a[i] * nu[i].1).collect();
        let e = disc.energy(&r, &h);
        if e.is_finite() && e <= e0 + ctrl.accept_tol {
            accepted = Some((r, h, e));
            break;
        }
        dt *= 0.5;
    }
    let Some((r, h, mut energy)) = accepted else {
        return Err(Error::StepFailure { retries: ctrl.max_retries, time: state.time });
    };
    let mut profile = ProfileCurve { r, h, ..c.clone() };
    profile.r[0] = 0.0;
    profile.r[n - 1] = 0.0;
    let time = state.time + dt;
    let profile_scale = profile.diameter().powi(4);
    let mut ref_spacing = state.ref_spacing.clone();
    let mut ref_neck = state.ref_neck;
    let (mut remeshes, mut remesh_jump, mut max_jump) = (state.remeshes, state.remesh_jump, state.max_remesh_jump);
    let mut neck = locate_neck(&profile);
    let sp = spacings(&profile.r, &profile.h);
    let ratio = sp
        .iter()
        .zip(&ref_spacing)
        .map(|(a, b)| a / b)
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), q| (lo.min(q), hi.max(q)));
    if ratio.1 / ratio.0 > ctrl.spacing_ratio || (neck.local_min && neck.r_min < ctrl.neck_refine * ref_neck) {
        let fresh = remesh(&profile, ctrl.curvature_share)?;
        let e_new = discrete_energy(&fresh);
        remesh_jump += e_new - energy;
        max_jump = max_jump.max((e_new - energy).abs());
        energy = e_new;
        profile = fresh;
        ref_spacing = spacings(&profile.r, &profile.h);
        neck = locate_neck(&profile);
        ref_neck = neck.r_min;
        remeshes += 1;
    }
    let tau = TangentLift::compute(&profile)?.tau;
    let (_, gr2, gh2) = Discretization::of(&profile).gradient(&profile.r, &profile.h);
    let mut history = state.history.clone();
    if history.len() == ctrl.history.max(1) {
        history.pop_front();
    }
    history.push_back((time, energy, neck.r_min));
    Ok(FlowState {
        grad_norm: grad_norm(&profile, &gr2, &gh2),
        profile,
        step: state.step + 1,
        time,
        dt: (dt * ctrl.grow).min(DT_MAX_REL * profile_scale),
        energy,
        neck,
        tau,
        history,
        ref_spacing,
        ref_neck,
        remeshes,
        remesh_jump,
        max_remesh_jump: max_jump,
    })
}

/// Redistribute the nodes so that each interval carries an equal share of
/// the monitor `(1 − β)/L + β|κ|/K`, graded so neighbouring spacings differ
/// by a bounded ratio. Positions are interpolated with five-point Lagrange
/// polynomials in the old parameter; the new parameter is uniform.
pub fn remesh(curve: &ProfileCurve, curvature_share: f64) -> Result<ProfileCurve> {
    let n = curve.len();
    let d = curve.derivs();
    let sp = spacings(&curve.r, &curve.h);
    let total: f64 = sp.iter().sum();
    let kappa: Vec<f64> = d
        .iter()
        .map(|q| {
            let l2 = q[0] * q[0] + q[1] * q[1];
            (q[0] * q[3] - q[1] * q[2]).abs() / (l2 * l2.sqrt())
        })
        .collect();
    // graded local target spacing
    let mut sigma: Vec<f64> = kappa.iter().map(|&k| if k > 0.0 { 1.0 / k } else { total }.min(total)).collect();
    let g = 0.3;
    let mut arc = vec![0.0; n];
    for i in 1..n {
        arc[i] = arc[i - 1] + sp[i - 1];
    }
    for i in 1..n {
        sigma[i] = sigma[i].min(sigma[i - 1] + g * sp[i - 1]);
    }
    for i in (0..n - 1).rev() {
        sigma[i] = sigma[i].min(sigma[i + 1] + g * sp[i]);
    }
    let mut mon = vec![0.0; n];
    for i in 1..n {
        mon[i] = mon[i - 1] + sp[i - 1] * 0.5 * (1.0 / sigma[i] + 1.0 / sigma[i - 1]);
    }
    let beta = curvature_share.clamp(0.0, 1.0);
    let cum: Vec<f64> = (0..n).map(|i| (1.0 - beta) * arc[i] / total + beta * mon[i] / mon[n - 1]).collect();
    let (mut r, mut h) = (vec![0.0; n], vec![0.0; n]);
    let mut j = 0;
    for k in 0..n {
        let target = k as f64 / (n - 1) as f64;
        while j + 2 < n && cum[j + 1] < target {
            j += 1;
        }
        let f = ((target - cum[j]) / (cum[j + 1] - cum[j])).clamp(0.0, 1.0);
        let s_old = curve.s[j] + f * (curve.s[j + 1] - curve.s[j]);
        let lo = j.saturating_sub(2).min(n - 5);
        let xs = &curve.s[lo..lo + 5];
        r[k] = lagrange(xs, &curve.r[lo..lo + 5], s_old);
        h[k] = lagrange(xs, &curve.h[lo..lo + 5], s_old);
    }
    r[0] = 0.0;
    r[n - 1] = 0.0;
    h[0] = curve.h[0];
    h[n - 1] = curve.h[n - 1];
    let mut c = ProfileCurve::new(curve.s.clone(), r, h, curve.closed_on_axis)?;
    c.meta = curve.meta.clone();
    uniform_parameter(&c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    Converged,
    SingularStop,
    Budget,
}

/// Logged trajectory sample.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub step: usize,
    pub t: f64,
    #[serde(rename = "W")]
    pub w: f64,
    pub r_min: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trajectory {
    pub rows: Vec<TrajectoryRow>,
    pub termination: Termination,
    pub final_state: FlowState,
    pub final_diagnostic: NeckDiagnostic,
    pub initial_energy: f64,
    pub initial_tau: f64,
    /// Accepted steps whose rounded `2τ` differs from the initial one.
    pub tau_changes: usize,
    /// Largest energy increase over an accepted step, remeshing excluded.
    pub max_step_increase: f64,
    pub step_failure: Option<String>,
}

impl Trajectory {
    /// CSV with header `step,t,W,r_min,residual`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(["step", "t", "W", "r_min", "residual"])?;
        for r in &self.rows {
            w.write_record([
                r.step.to_string(),
                format!("{:?}", r.t),
                format!("{:?}", r.w),
                format!("{:?}", r.r_min),
                format!("{:?}", r.residual),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// Observer called after every accepted step.
pub trait Observer {
    fn accepted(&mut self, _before: &FlowState, _after: &FlowState) {}
}

impl Observer for () {}

impl<F: FnMut(&FlowState, &FlowState)> Observer for F {
    fn accepted(&mut self, before: &FlowState, after: &FlowState) {
        self(before, after)
    }
}

fn row(s: &FlowState, ctrl: &FlowControls) -> TrajectoryRow {
    let d = s.diagnostic(ctrl.neck_halfwidth);
    TrajectoryRow { step: s.step, t: s.time, w: s.energy, r_min: s.neck.r_min, residual: d.residual }
}

/// Flow until convergence, a singular stop or the step budget.
pub fn flow_run(init: ProfileCurve, ctrl: &FlowControls, mut obs: impl Observer) -> Result<Trajectory> {
    let mut state = FlowState::new(init, ctrl)?;
    let floor = ctrl.r_floor.unwrap_or(1e-3 * state.profile.diameter());
    let initial_energy = state.energy;
    let initial_tau = state.tau;
    let mut rows = vec![row(&state, ctrl)];
    let mut tau_changes = 0;
    let mut max_inc = f64::NEG_INFINITY;
    let mut step_failure = None;
    let converged = |s: &FlowState| s.grad_norm < ctrl.grad_tol && (s.energy - ctrl.target).abs() < ctrl.energy_tol;
    let mut termination = Termination::Budget;
    if converged(&state) {
        termination = Termination::Converged;
    }
    while termination == Termination::Budget && state.step < ctrl.max_steps {
        let next = match flow_step(&state, ctrl) {
            Ok(s) => s,
            Err(e @ Error::StepFailure { .. }) => {
                step_failure = Some(e.to_string());
                if state.neck.local_min && state.neck.r_min < 10.0 * floor {
                    termination = Termination::SingularStop;
                }
                break;
            }
            Err(e) => return Err(e),
        };
        let jump = next.remesh_jump - state.remesh_jump;
        max_inc = max_inc.max(next.energy - jump - state.energy);
        if (2.0 * next.tau).round() != (2.0 * initial_tau).round() {
            tau_changes += 1;
        }
        obs.accepted(&state, &next);
        state = next;
        if state.step % ctrl.log_every.max(1) == 0 {
            rows.push(row(&state, ctrl));
        }
        if converged(&state) {
            termination = Termination::Converged;
        } else if state.neck.local_min && state.neck.r_min < floor {
            termination = Termination::SingularStop;
        }
    }
    if rows.last().is_none_or(|r| r.step != state.step) {
        rows.push(row(&state, ctrl));
    }
    let final_diagnostic = state.diagnostic(ctrl.neck_halfwidth);
    Ok(Trajectory {
        rows,
        termination,
        final_diagnostic,
        final_state: state,
        initial_energy,
        initial_tau,
        tau_changes,
        max_step_increase: max_inc,
        step_failure,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere(n: usize) -> ProfileCurve {
        ProfileCurve::from_fn(n, 0.0, PI, (true, true), |t| (t.sin(), -t.cos())).unwrap()
    }

    #[test]
    fn accepted_steps_do_not_increase_energy() {
        let c = ProfileCurve::from_fn(61, 0.0, PI, (true, true), |t| {
            let a = 1.0 + 0.05 * (-((t - 1.2) / 0.3).powi(2)).exp();
            (a * t.sin(), -a * t.cos())
        })
        .unwrap();
        let ctrl = FlowControls::default();
        let mut s = FlowState::new(c, &ctrl).unwrap();
        for _ in 0..50 {
            let n = flow_step(&s, &ctrl).unwrap();
            let jump = n.remesh_jump - s.remesh_jump;
            assert!(n.energy - jump <= s.energy + ctrl.accept_tol);
            s = n;
        }
    }

    #[test]
    fn one_step_is_scale_equivariant() {
        let c = ProfileCurve::from_fn(41, 0.0, PI, (true, true), |t| {
            let a = 1.0 + 0.1 * (2.0 * t).cos();
            (a * t.sin(), -a * t.cos())
        })
        .unwrap();
        let sigma: f64 = 2.5;
        let ctrl = FlowControls { dt0: Some(1e-6), spacing_ratio: f64::INFINITY, neck_refine: 0.0, ..Default::default() };
        let a = flow_step(&FlowState::new(c.clone(), &ctrl).unwrap(), &ctrl).unwrap();
        let ctrl2 = FlowControls { dt0: Some(1e-6 * sigma.powi(4)), ..ctrl.clone() };
        let b = flow_step(&FlowState::new(c.scaled(sigma), &ctrl2).unwrap(), &ctrl2).unwrap();
        for i in 0..c.len() {
            assert!((sigma * a.profile.r[i] - b.profile.r[i]).abs() < 1e-12 * sigma);
            assert!((sigma * a.profile.h[i] - b.profile.h[i]).abs() < 1e-12 * sigma);
        }
    }

    #[test]
    fn remesh_keeps_the_curve() {
        let c = sphere(81);
        let m = remesh(&c, 0.5).unwrap();
        for i in 0..m.len() {
            assert!((m.r[i].hypot(m.h[i]) - 1.0).abs() < 1e-7);
        }
    }
}
