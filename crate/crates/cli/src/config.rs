use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use sica_core::becsim::default_detector_points;
use sica_core::{ModeSpec, NegentropyConfig, NoiseSpec, SicaConfig, SpatialGrid, TimeGrid, TrapParams};

use crate::CliError;

/// One JSON document describing a whole run. Missing keys take defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub trap: TrapParams,
    pub modes: ModeSpec,
    pub noise: NoiseSpec,
    /// Defaults to 101 points over ±1.3 R_TF.
    pub spatial_grid: Option<SpatialGrid>,
    pub time_grid: TimeGrid,
    pub sica: SicaConfig,
    pub negentropy: NegentropyConfig,
    /// Detector coordinates (x, y); defaults to three points inside the cloud.
    pub detectors: Option<Vec<[f64; 2]>>,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            trap: TrapParams::default(),
            modes: ModeSpec::default(),
            noise: NoiseSpec::default(),
            spatial_grid: None,
            time_grid: TimeGrid::new(0.0, 4.0 * std::f64::consts::PI / 400.0, 400).expect("valid default grid"),
            sica: SicaConfig::default(),
            negentropy: NegentropyConfig::default(),
            detectors: None,
            output_dir: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
    }

    /// `--seed` drives the noise and both optimisers; `--out` replaces the output directory.
    pub fn apply_overrides(&mut self, seed: Option<u64>, out: Option<PathBuf>) {
        if let Some(s) = seed {
            self.noise.rng_seed = s;
            self.sica.rng_seed = s;
            self.negentropy.rng_seed = s;
        }
        if let Some(o) = out {
            self.output_dir = o;
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let check = |r: sica_core::Result<()>| r.map_err(|e| CliError::config(e.to_string()));
        check(self.trap.validate())?;
        check(self.modes.validate())?;
        check(self.noise.validate())?;
        check(self.spatial_grid().validate())?;
        check(self.sica.validate())?;
        check(self.negentropy.validate())?;
        if let Some(d) = &self.detectors {
            if d.is_empty() || d.iter().flatten().any(|v| !v.is_finite()) {
                return Err(CliError::config("detectors must be a non-empty list of finite points"));
            }
        }
        Ok(())
    }

    pub fn spatial_grid(&self) -> SpatialGrid {
        self.spatial_grid.unwrap_or_else(|| SpatialGrid::for_trap(&self.trap))
    }

    pub fn detector_points(&self) -> Vec<(f64, f64)> {
        match &self.detectors {
            Some(d) => d.iter().map(|p| (p[0], p[1])).collect(),
            None => default_detector_points(&self.trap),
        }
    }

    /// SHA-256 of the compact JSON form of the effective configuration,
    /// output directory excluded.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output_dir = PathBuf::new();
        let text = serde_json::to_string(&c).expect("config serialises");
        hex::encode(Sha256::digest(text.as_bytes()))
    }
}
