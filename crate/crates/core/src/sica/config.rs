use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Points at which empirical and reference CGFs are compared.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ZGrid {
    z_values: Vec<f64>,
}

impl ZGrid {
    pub fn new(z_values: Vec<f64>) -> Result<Self> {
        if z_values.len() < 2 {
            return Err(Error::param("z grid needs at least two points"));
        }
        if z_values.iter().any(|z| !z.is_finite()) {
            return Err(Error::param("z grid values must be finite"));
        }
        if z_values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::param("z grid must be strictly increasing"));
        }
        Ok(Self { z_values })
    }

    pub fn values(&self) -> &[f64] {
        &self.z_values
    }

    pub fn len(&self) -> usize {
        self.z_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z_values.is_empty()
    }
}

impl ZGrid {
    /// {0.2, 0.4, ..., 2.0}
    pub fn positive() -> Self {
        Self { z_values: (1..=10).map(|i| 0.2 * i as f64).collect() }
    }
}

impl Default for ZGrid {
    /// {−2.0, ..., −0.2, 0.2, ..., 2.0}. The reference CGF is even, and the
    /// negative half penalises skewed mixtures that match only one tail.
    fn default() -> Self {
        let pos = Self::positive().z_values;
        Self { z_values: pos.iter().rev().map(|z| -z).chain(pos.iter().copied()).collect() }
    }
}

impl TryFrom<Vec<f64>> for ZGrid {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<ZGrid> for Vec<f64> {
    fn from(g: ZGrid) -> Self {
        g.z_values
    }
}

/// Settings for cumulant-matching extraction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SicaConfig {
    pub z_grid: ZGrid,
    pub periods_per_window: u32,
    pub max_outer_iterations: usize,
    pub freq_rel_tol: f64,
    pub newton_max_steps: usize,
    pub newton_grad_tol: f64,
    pub restarts: usize,
    pub rng_seed: u64,
}

impl Default for SicaConfig {
    fn default() -> Self {
        Self {
            z_grid: ZGrid::default(),
            periods_per_window: 2,
            max_outer_iterations: 10,
            freq_rel_tol: 1e-3,
            newton_max_steps: 200,
            newton_grad_tol: 1e-10,
            restarts: 8,
            rng_seed: 0,
        }
    }
}

impl SicaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.periods_per_window < 1 {
            return Err(Error::param("periods_per_window must be at least 1"));
        }
        if self.max_outer_iterations < 1 {
            return Err(Error::param("max_outer_iterations must be at least 1"));
        }
        if !(self.freq_rel_tol > 0.0) || !(self.newton_grad_tol > 0.0) {
            return Err(Error::param("tolerances must be positive"));
        }
        if self.restarts < 1 || self.newton_max_steps < 1 {
            return Err(Error::param("restarts and newton_max_steps must be at least 1"));
        }
        Ok(())
    }
}
