//! Catenoid spheres: half a catenoid of scale `1/λ` glued across a band of
//! half-width `δ` at radius 1 to a round sphere of radius `R`.
//!
//! Coordinates follow the gluing frame: the catenary and the sphere both pass
//! through `(r, h) = (1, 0)`. The profile starts at the catenary waist
//! `(1/λ, −t₀)`, crosses the band `[1−δ, 1+δ]` as a graph and follows the
//! sphere to its far pole on the axis.

pub mod table;
pub mod verify;

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gluing::GluingProfile;
use crate::numerics::quad::simpson_weights;
use crate::numerics::{Integral, QuadSettings};
use crate::profile::ProfileCurve;
use crate::segments::{Chain, SampleSpec, Segment};

pub use table::{catenary_graph, sphere_graph, DerivativeTable};
pub use verify::{verify_glue_scaling, verify_shrinking, GlueScalingConfig, GlueScalingReport, ShrinkingConfig, ShrinkingReport};

/// Attachment type: `Beta` is tangent to the catenary when `R = λ`,
/// `Alpha` uses the reflected sphere and crosses it transversally.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Alpha,
    Beta,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::Alpha => "alpha",
            Kind::Beta => "beta",
        })
    }
}

impl std::str::FromStr for Kind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Kind> {
        match s.to_ascii_lowercase().as_str() {
            "alpha" | "a" | "α" => Ok(Kind::Alpha),
            "beta" | "b" | "β" => Ok(Kind::Beta),
            _ => Err(Error::Parameter(format!("unknown kind `{s}` (expected alpha or beta)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CatSphParams {
    pub lambda: f64,
    pub radius: f64,
    pub delta: f64,
    pub kind: Kind,
}

impl CatSphParams {
    /// Validated parameters with `δ > 0`.
    pub fn new(lambda: f64, radius: f64, delta: f64, kind: Kind) -> Result<Self> {
        let p = CatSphParams { lambda, radius, delta, kind };
        p.validate(false)?;
        Ok(p)
    }

    /// The tangent family `R = λ`.
    pub fn symmetric(lambda: f64, delta: f64, kind: Kind) -> Result<Self> {
        Self::new(lambda, lambda, delta, kind)
    }

    pub fn validate(&self, allow_zero_delta: bool) -> Result<()> {
        let CatSphParams { lambda, radius, delta, .. } = *self;
        if !(lambda > 1.0 && lambda.is_finite()) {
            return Err(Error::Domain(format!("constraint λ > 1 violated: λ = {lambda}")));
        }
        if !(radius > 1.0 && radius.is_finite()) {
            return Err(Error::Domain(format!("constraint R > 1 violated: R = {radius}")));
        }
        if allow_zero_delta && delta == 0.0 {
            return Ok(());
        }
        if !(delta > 0.0) {
            return Err(Error::Domain(format!("constraint δ > 0 violated: δ = {delta}")));
        }
        if !(delta < 1.0 - 1.0 / lambda) {
            return Err(Error::Domain(format!("constraint δ < 1 − 1/λ = {} violated: δ = {delta}", 1.0 - 1.0 / lambda)));
        }
        if !(delta < radius - 1.0) {
            return Err(Error::Domain(format!("constraint δ < R − 1 = {} violated: δ = {delta}", radius - 1.0)));
        }
        Ok(())
    }

    /// `t₀ = arccosh(λ)/λ`, the height of the unit circle above the waist.
    pub fn t0(&self) -> f64 {
        self.lambda.acosh() / self.lambda
    }

    /// `θ = arcsin(1/R)`.
    pub fn theta(&self) -> f64 {
        (1.0 / self.radius).asin()
    }

    /// Signed height of the sphere center: `+√(R²−1)` for β, `−√(R²−1)` for α.
    pub fn sphere_center(&self) -> f64 {
        let c = (self.radius * self.radius - 1.0).sqrt();
        match self.kind {
            Kind::Beta => c,
            Kind::Alpha => -c,
        }
    }

    /// Band height `h = u + φ(v − u)` with `(h, h', h'')`.
    pub fn band(&self, phi: &GluingProfile, x: f64) -> (f64, f64, f64) {
        let (u, u1, u2) = catenary_graph(self.lambda, x);
        let (mut v, mut v1, mut v2) = sphere_graph(self.radius, x);
        if self.kind == Kind::Alpha {
            (v, v1, v2) = (-v, -v1, -v2);
        }
        let (p, p1, p2) = phi.eval(x);
        let (d, d1, d2) = (v - u, v1 - u1, v2 - u2);
        (u + p * d, u1 + p * d1 + p1 * d, u2 + p * d2 + 2.0 * p1 * d1 + p2 * d)
    }

    fn check_profile(&self, phi: &GluingProfile) -> Result<()> {
        self.validate(false)?;
        if (phi.delta - self.delta).abs() > 1e-15 || phi.center != 1.0 {
            return Err(Error::Parameter(format!(
                "gluing function band [{}, {}] does not match δ = {}",
                phi.inner(),
                phi.outer(),
                self.delta
            )));
        }
        Ok(())
    }
}

/// Energy contributions of a catenoid sphere.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub cap: Integral,
    pub glue: Integral,
    pub neck: Integral,
    pub total: Integral,
}

/// `W^cap(R, δ) = 2π(1 + √(1 − (1+δ)²/R²))`.
pub fn w_cap(radius: f64, delta: f64) -> f64 {
    let q = (1.0 + delta) / radius;
    2.0 * PI * (1.0 + (1.0 - q * q).sqrt())
}

/// `∂λ W^cap(λ, δ) = 2π(1+δ)² / (λ² √(λ² − (1+δ)²))` on the family `R = λ`.
pub fn w_cap_dlambda(lambda: f64, delta: f64) -> f64 {
    let a = (1.0 + delta) * (1.0 + delta);
    2.0 * PI * a / (lambda * lambda * (lambda * lambda - a).sqrt())
}

/// Labels of the three pieces of a catenoid-sphere chain.
pub const NECK: &str = "neck";
pub const GLUE: &str = "glue";
pub const CAP: &str = "cap";

/// Catenary, band and sphere segments, from the waist to the pole.
pub fn catsph_chain(p: &CatSphParams, phi: &GluingProfile) -> Result<Chain> {
    p.check_profile(phi)?;
    let lam = p.lambda;
    let t0 = p.t0();
    let ta = (lam * (1.0 - p.delta)).acosh() / lam;
    let neck = Segment::catenary(NECK, lam, 0.0, ta).shifted(-t0);
    let pp = *p;
    let phi_c = *phi;
    let glue = Segment::graph(GLUE, 1.0 - p.delta, 1.0 + p.delta, move |x| pp.band(&phi_c, x)).with_feature(p.delta);
    let ts = ((1.0 + p.delta) / p.radius).asin();
    let cap = match p.kind {
        Kind::Beta => Segment::circle(CAP, p.radius, p.sphere_center(), ts, PI),
        Kind::Alpha => Segment::circle(CAP, p.radius, p.sphere_center(), 0.0, PI - ts).reversed(),
    };
    Chain::new(vec![neck, glue, cap])
}

/// Default number of samples of a catenoid-sphere profile.
pub const DEFAULT_SAMPLES: usize = 4097;

/// Sampled catenoid-sphere profile with exact derivatives.
pub fn build_catsph(p: &CatSphParams, phi: &GluingProfile) -> Result<ProfileCurve> {
    build_catsph_with(p, phi, SampleSpec::new(DEFAULT_SAMPLES))
}

pub fn build_catsph_with(p: &CatSphParams, phi: &GluingProfile, spec: SampleSpec) -> Result<ProfileCurve> {
    let c = catsph_chain(p, phi)?.sample(spec)?;
    Ok(c.with_meta("kind", p.kind.to_string())
        .with_meta("lambda", p.lambda.to_string())
        .with_meta("R", p.radius.to_string())
        .with_meta("delta", p.delta.to_string()))
}

/// Panels of the fixed composite Simpson rule over the band.
pub const GLUE_PANELS: usize = 4096;

/// `W^glue` by composite Simpson on a fixed grid over the band, with a
/// Richardson estimate from the half grid. The grid is fixed so that the
/// result is smooth in `λ`.
pub fn glue_energy(p: &CatSphParams, phi: &GluingProfile) -> Result<Integral> {
    p.check_profile(phi)?;
    let n = GLUE_PANELS;
    let xs: Vec<f64> = (0..=n).map(|k| 1.0 + p.delta * (2.0 * k as f64 / n as f64 - 1.0)).collect();
    let f: Vec<f64> = xs
        .iter()
        .map(|&x| {
            let (_, d1, d2) = p.band(phi, x);
            crate::gluing::annulus::radial_graph_density(x, d1, d2)
        })
        .collect();
    let fine: f64 = simpson_weights(&xs).iter().zip(&f).map(|(w, v)| w * v).sum();
    let xc: Vec<f64> = xs.iter().step_by(2).copied().collect();
    let fc: Vec<f64> = f.iter().step_by(2).copied().collect();
    let coarse: f64 = simpson_weights(&xc).iter().zip(&fc).map(|(w, v)| w * v).sum();
    Ok(Integral { value: fine, error: (fine - coarse).abs() / 15.0 })
}

/// Quadrature settings for the neck and cap pieces.
pub fn piece_quad() -> QuadSettings {
    QuadSettings { tol: 1e-12, max_depth: 40, initial_panels: 32 }
}

/// Energy breakdown. `δ = 0` returns the closed-form extension.
pub fn catsph_energy(p: &CatSphParams, phi: Option<&GluingProfile>) -> Result<EnergyBreakdown> {
    if p.delta == 0.0 {
        p.validate(true)?;
        let cap = Integral { value: w_cap(p.radius, 0.0), error: 0.0 };
        return Ok(EnergyBreakdown { cap, glue: Integral::ZERO, neck: Integral::ZERO, total: cap });
    }
    let own;
    let phi = match phi {
        Some(f) => f,
        None => {
            own = GluingProfile::new(p.delta)?;
            &own
        }
    };
    let chain = catsph_chain(p, phi)?;
    let q = piece_quad();
    let neck = chain.segments[0].energy(q);
    let cap = chain.segments[2].energy(q);
    let glue = glue_energy(p, phi)?;
    Ok(EnergyBreakdown { cap, glue, neck, total: cap + glue + neck })
}

/// `∂λ W^glue_β(λ, δ)` on `R = λ` by a central difference with step `λ·1e−4`.
pub fn glue_energy_dlambda(lambda: f64, delta: f64, kind: Kind, phi: &GluingProfile) -> Result<f64> {
    let h = lambda * 1e-4;
    let wp = glue_energy(&CatSphParams::symmetric(lambda + h, delta, kind)?, phi)?.value;
    let wm = glue_energy(&CatSphParams::symmetric(lambda - h, delta, kind)?, phi)?.value;
    Ok((wp - wm) / (2.0 * h))
}
