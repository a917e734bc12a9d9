use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::Rng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CosineConfig {
    /// Standard deviation of the additive noise.
    pub sigma: f64,
    pub dt: f64,
    pub steps: usize,
}

impl Default for CosineConfig {
    fn default() -> Self {
        Self {
            sigma: 0.02,
            dt: 0.05,
            steps: 100_000,
        }
    }
}

impl CosineConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma >= 0.0) || !(self.dt > 0.0) {
            return Err(Error::Config(format!(
                "cosine needs sigma >= 0 and dt > 0, got sigma={} dt={}",
                self.sigma, self.dt
            )));
        }
        Ok(())
    }
}

/// Noise-free value `cos(k·dt)`.
pub fn cosine_clean(k: usize, dt: f64) -> f64 {
    (k as f64 * dt).cos()
}

/// `x_k = cos(k·dt) + ε_k` with `ε_k ~ N(0, σ²)` i.i.d.
pub fn gen_noisy_cosine(cfg: &CosineConfig, rng: &mut Rng) -> Result<Vec<f64>> {
    cfg.validate()?;
    Ok((0..cfg.steps)
        .map(|k| cosine_clean(k, cfg.dt) + cfg.sigma * rng.standard_normal())
        .collect())
}
