//! Bundled profile curves: closed test surfaces for the Li–Yau check and a
//! few open pieces for energy examples. Random members come from a seeded
//! ChaCha stream, so a seed fixes the corpus bit for bit.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catsph::Kind;
use crate::error::Result;
use crate::gluing::GluingProfile;
use crate::homotopy::{assemble_model_with, triple_bubble, AttachmentConfig};
use crate::profile::{liyau_check, LiYauReport, ProfileCurve};
use crate::segments::{Chain, SampleSpec, Segment};

pub const DEFAULT_SEED: u64 = 20_240_601;
/// Random star-shaped spheres in the corpus.
pub const RANDOM_SPHERES: usize = 4;
/// Default samples per sphere-like member; two-sphere models get `2n − 1`.
pub const SAMPLES: usize = 4097;

#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub name: String,
    pub curve: ProfileCurve,
}

fn entry(name: &str, curve: ProfileCurve) -> CorpusEntry {
    CorpusEntry { name: name.into(), curve: curve.with_meta("name", name) }
}

pub fn round_sphere(n: usize) -> Result<ProfileCurve> {
    ProfileCurve::from_fn(n, 0.0, PI, (true, true), |s| (s.sin(), -s.cos()))
}

/// Catenary band `r = cosh(λh)/λ` over `|h| ≤ acosh(λ)/λ`.
pub fn catenary_band(lambda: f64, n: usize) -> Result<ProfileCurve> {
    let t0 = lambda.acosh() / lambda;
    ProfileCurve::from_fn(n, -t0, t0, (false, false), |t| ((lambda * t).cosh() / lambda, t))
}

/// Spherical cap of radius `R` from the south pole past the equator up to
/// the circle of radius `1 + δ`.
pub fn spherical_cap(radius: f64, delta: f64, n: usize) -> Result<ProfileCurve> {
    let top = PI - ((1.0 + delta) / radius).asin();
    ProfileCurve::from_fn(n, 0.0, top, (true, false), |s| (radius * s.sin(), -radius * s.cos()))
}

/// `ρ(s)(sin s, −cos s)` with `ρ = 1 + Σ_{k=2}^{6} a_k cos(ks)`,
/// `|a_k| ≤ 0.15/k`. Even cosines keep the axis contact perpendicular.
pub fn random_sphere(rng: &mut impl Rng, n: usize) -> Result<ProfileCurve> {
    let a: Vec<f64> = (2..=6).map(|k| rng.gen_range(-0.15..0.15) / k as f64).collect();
    ProfileCurve::from_fn(n, 0.0, PI, (true, true), move |s| {
        let rho = 1.0 + a.iter().enumerate().map(|(j, c)| c * ((j + 2) as f64 * s).cos()).sum::<f64>();
        (rho * s.sin(), -rho * s.cos())
    })
}

/// Unit half circle with two full circles of radii 0.4 and 0.25 inserted
/// at the equator point `(1, 0)`, all tangent there: the profile passes
/// that point three times and `τ = 5/2`.
pub fn triple_pass(n: usize) -> Result<ProfileCurve> {
    let inner = |rho: f64| {
        Segment::new("loop", 0.0, 2.0 * PI, move |u| {
            let (s, c) = u.sin_cos();
            [1.0 - rho + rho * c, rho * s, -rho * s, rho * c, -rho * c, -rho * s]
        })
    };
    let chain = Chain::new(vec![
        Segment::circle("lower", 1.0, 0.0, 0.0, 0.5 * PI),
        inner(0.4),
        inner(0.25),
        Segment::circle("upper", 1.0, 0.0, 0.5 * PI, PI),
    ])?;
    let c = chain.sample_broken(SampleSpec::new(n))?;
    let mut c = ProfileCurve { closed_on_axis: (true, true), ..c };
    let last = c.len() - 1;
    c.r[0] = 0.0;
    c.r[last] = 0.0;
    Ok(c)
}

/// Closed members: round and random spheres, the three two-sphere models
/// at `λ = 20, δ = 0.1`, the triple bubble and the triple-pass curve.
pub fn closed_corpus(seed: u64) -> Result<Vec<CorpusEntry>> {
    closed_corpus_with(seed, SAMPLES)
}

pub fn closed_corpus_with(seed: u64, n: usize) -> Result<Vec<CorpusEntry>> {
    let phi = GluingProfile::new(0.1)?;
    let mut out = vec![entry("sphere", round_sphere(n)?)];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in 0..RANDOM_SPHERES {
        out.push(entry(&format!("random_sphere_{k}"), random_sphere(&mut rng, n)?));
    }
    for (name, kinds) in [
        ("j_model", (Kind::Alpha, Kind::Alpha)),
        ("dumbbell", (Kind::Beta, Kind::Beta)),
        ("mixed_model", (Kind::Alpha, Kind::Beta)),
    ] {
        out.push(entry(name, assemble_model_with(&AttachmentConfig::symmetric(kinds, 20.0, 0.1)?, &phi, 2 * n - 1)?));
    }
    out.push(entry("triple_bubble", triple_bubble(20.0, 0.1, &phi)?));
    out.push(entry("triple_pass", triple_pass(n)?));
    Ok(out)
}

/// Closed corpus plus open pieces.
pub fn bundled(seed: u64) -> Result<Vec<CorpusEntry>> {
    bundled_with(seed, SAMPLES)
}

pub fn bundled_with(seed: u64, n: usize) -> Result<Vec<CorpusEntry>> {
    let mut out = closed_corpus_with(seed, n)?;
    out.push(entry("catenary", catenary_band(2.0, n)?));
    out.push(entry("cap", spherical_cap(6.0, 0.1, n)?));
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LiYauRow {
    pub name: String,
    pub report: LiYauReport,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LiYauSuite {
    pub seed: u64,
    pub rows: Vec<LiYauRow>,
    pub violations: usize,
    pub passed: bool,
}

/// Li–Yau check on every closed corpus curve, in corpus order.
pub fn liyau_suite(seed: u64) -> Result<LiYauSuite> {
    let corpus = closed_corpus(seed)?;
    let rows = corpus
        .par_iter()
        .map(|e| Ok(LiYauRow { name: e.name.clone(), report: liyau_check(&e.curve)? }))
        .collect::<Result<Vec<_>>>()?;
    let violations = rows.iter().filter(|r| !r.report.satisfied).count();
    Ok(LiYauSuite { seed, rows, violations, passed: violations == 0 })
}
