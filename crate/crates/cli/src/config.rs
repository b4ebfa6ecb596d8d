//! Run configuration: a JSON file whose fields fill in whatever the command
//! line leaves unset.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::Deserialize;
use willmore_core::catsph::{GlueScalingConfig, ShrinkingConfig};
use willmore_core::flow::FlowControls;
use willmore_core::gluing::verify::GluingConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HomotopyConfig {
    pub lambda_start: Option<f64>,
    pub lambda_end: Option<f64>,
    pub delta: Option<f64>,
    pub steps: Option<usize>,
    pub frames: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub kind: Option<String>,
    pub lambdas: Option<Vec<f64>>,
    pub deltas: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub tol: Option<f64>,
    pub grid: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub flow: Option<FlowControls>,
    pub gluing: Option<GluingConfig>,
    pub catsph: Option<ShrinkingConfig>,
    pub glue_scaling: Option<GlueScalingConfig>,
    pub homotopy: HomotopyConfig,
    pub sweep: SweepConfig,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> anyhow::Result<RunConfig> {
        let Some(path) = path else { return Ok(RunConfig::default()) };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let cfg: RunConfig = serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> anyhow::Result<()> {
        if let Some(t) = self.tol {
            check_tol(t)?;
        }
        if let Some(g) = self.grid {
            check_grid(g)?;
        }
        Ok(())
    }
}

pub fn check_tol(t: f64) -> anyhow::Result<f64> {
    if !(t > 0.0 && t.is_finite()) {
        bail!("tolerance must be positive and finite (got {t})");
    }
    Ok(t)
}

pub fn check_grid(n: usize) -> anyhow::Result<usize> {
    if n < 33 {
        bail!("grid needs at least 33 samples (got {n})");
    }
    Ok(n)
}

/// Parses `a:b:step` ranges and comma lists, e.g. `20:200:10` or
/// `0.05,0.1,0.2`. The empty string is the empty grid.
pub fn parse_grid(text: &str) -> Result<Vec<f64>, String> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for part in text.split(',') {
        let part = part.trim();
        let nums: Vec<f64> = part
            .split(':')
            .map(|p| p.trim().parse::<f64>().map_err(|e| format!("bad number `{p}`: {e}")))
            .collect::<Result<_, _>>()?;
        match nums[..] {
            [x] => out.push(x),
            [a, b, step] => {
                if !(step > 0.0) || b < a {
                    return Err(format!("range `{part}` needs step > 0 and end ≥ start"));
                }
                let count = ((b - a) / step + 1e-9).floor() as usize;
                // integer multiples avoid accumulated rounding
                out.extend((0..=count).map(|k| a + k as f64 * step));
            }
            _ => return Err(format!("expected a number or start:end:step, got `{part}`")),
        }
    }
    if out.iter().any(|v| !v.is_finite()) {
        return Err("grid values must be finite".into());
    }
    Ok(out)
}
