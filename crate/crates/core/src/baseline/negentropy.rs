use std::ops::Range;
use std::sync::OnceLock;

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sica::{
    fit_cosine, normalized, restart_rng, sica_loss, ComponentFailure, ComponentResult, ComponentStatus, MethodConfig,
    RoundRecord, UnmixingSolution, ZGrid,
};
use crate::signal::{project, whiten, Ensemble};
use crate::special::adaptive_simpson;

/// Contrast function G of the negentropy approximation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Contrast {
    #[default]
    LogCosh,
    Quartic,
}

impl Contrast {
    /// G(u)
    pub fn value(self, u: f64) -> f64 {
        match self {
            Contrast::LogCosh => {
                let a = u.abs();
                a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
            }
            Contrast::Quartic => 0.25 * u.powi(4),
        }
    }

    /// G'(u)
    fn derivative(self, u: f64) -> f64 {
        match self {
            Contrast::LogCosh => u.tanh(),
            Contrast::Quartic => u.powi(3),
        }
    }

    /// G''(u)
    fn second_derivative(self, u: f64) -> f64 {
        match self {
            Contrast::LogCosh => 1.0 - u.tanh().powi(2),
            Contrast::Quartic => 3.0 * u * u,
        }
    }

    /// E[G(ν)] for standard normal ν, by quadrature.
    pub fn gaussian_expectation(self) -> f64 {
        static LOG_COSH: OnceLock<f64> = OnceLock::new();
        static QUARTIC: OnceLock<f64> = OnceLock::new();
        let cell = match self {
            Contrast::LogCosh => &LOG_COSH,
            Contrast::Quartic => &QUARTIC,
        };
        *cell.get_or_init(|| {
            let norm = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
            let f = |u: f64| self.value(u) * (-0.5 * u * u).exp() * norm;
            // unit pieces so the adaptive rule cannot stop on a coarse grid of near-zeros
            (-40..40).map(|k| adaptive_simpson(&f, k as f64, k as f64 + 1.0, 1e-16)).sum()
        })
    }

    /// (E[G(s)] − E[G(ν)])²
    pub fn negentropy(self, s: &[f64]) -> f64 {
        let mean = s.iter().map(|&u| self.value(u)).sum::<f64>() / s.len() as f64;
        (mean - self.gaussian_expectation()).powi(2)
    }
}

/// Settings for fixed-point negentropy extraction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NegentropyConfig {
    pub contrast: Contrast,
    pub max_iterations: usize,
    pub tol: f64,
    pub restarts: usize,
    pub rng_seed: u64,
}

impl Default for NegentropyConfig {
    fn default() -> Self {
        Self { contrast: Contrast::LogCosh, max_iterations: 500, tol: 1e-8, restarts: 8, rng_seed: 0 }
    }
}

impl NegentropyConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::param("negentropy tol must be positive"));
        }
        if self.restarts < 1 || self.max_iterations < 1 {
            return Err(Error::param("restarts and max_iterations must be at least 1"));
        }
        Ok(())
    }
}

fn orthogonalize(w: &mut [f64], against: &[Vec<f64>]) {
    for _ in 0..2 {
        for v in against {
            let d: f64 = w.iter().zip(v).map(|(a, b)| a * b).sum();
            w.iter_mut().zip(v).for_each(|(a, b)| *a -= d * b);
        }
    }
}

/// One-unit fixed-point iteration from `w`; `None` if it fails to settle.
fn fixed_point(xs: &[Vec<f64>], mut w: Vec<f64>, against: &[Vec<f64>], config: &NegentropyConfig) -> Option<Vec<f64>> {
    let m = w.len();
    let n = xs.len() as f64;
    for _ in 0..config.max_iterations {
        let mut next = vec![0.0; m];
        let mut mean_d2 = 0.0;
        for x in xs {
            let s: f64 = x.iter().zip(&w).map(|(a, b)| a * b).sum();
            let g = config.contrast.derivative(s);
            mean_d2 += config.contrast.second_derivative(s);
            next.iter_mut().zip(x).for_each(|(o, xi)| *o += g * xi);
        }
        mean_d2 /= n;
        next.iter_mut().zip(&w).for_each(|(o, wi)| *o = *o / n - mean_d2 * wi);
        orthogonalize(&mut next, against);
        let norm = next.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > 1e-300) || !norm.is_finite() {
            return None;
        }
        next.iter_mut().for_each(|v| *v /= norm);
        let overlap: f64 = next.iter().zip(&w).map(|(a, b)| a * b).sum();
        w = next;
        if (1.0 - overlap.abs()).abs() < config.tol {
            return Some(w);
        }
    }
    None
}

/// Deflation FastICA with a negentropy contrast, whitened over `window`.
pub fn negentropy_extract(
    raw: &Ensemble,
    n_components: usize,
    config: &NegentropyConfig,
    window: Range<usize>,
) -> Result<UnmixingSolution> {
    config.validate()?;
    let m = raw.n_channels();
    if n_components == 0 || n_components > m {
        return Err(Error::param(format!("n_components must be in 1..={m}, got {n_components}")));
    }
    let grid = *raw.grid();
    let wh = whiten(raw, window.clone())?;
    let xs: Vec<Vec<f64>> = window.clone().map(|k| wh.sample(k).iter().copied().collect()).collect();
    let z_grid = ZGrid::default();

    let mut found: Vec<Vec<f64>> = Vec::new();
    let mut components = Vec::new();
    let mut failures = Vec::new();
    for c in 0..n_components {
        let mut best: Option<(f64, Vec<f64>)> = None;
        for r in 0..config.restarts {
            let mut rng = restart_rng(config.rng_seed, c, r);
            let mut w: Vec<f64> = (0..m).map(|_| StandardNormal.sample(&mut rng)).collect();
            orthogonalize(&mut w, &found);
            let w = normalized(&w);
            let Some(w) = fixed_point(&xs, w, &found, config) else { continue };
            let s: Vec<f64> = xs.iter().map(|x| x.iter().zip(&w).map(|(a, b)| a * b).sum()).collect();
            let j = config.contrast.negentropy(&s);
            if best.as_ref().is_none_or(|(bj, _)| j > *bj) {
                best = Some((j, w));
            }
        }
        let Some((j, mut direction)) = best else {
            failures.push(ComponentFailure {
                extraction_index: c,
                error: Error::NoConvergence { grad_norm: f64::NAN }.to_string(),
            });
            // nothing to deflate against; later components may still be found
            continue;
        };
        let mut signal = project(&wh, &direction)?;
        if signal[0] < 0.0 {
            direction.iter_mut().for_each(|d| *d = -*d);
            signal.iter_mut().for_each(|s| *s = -*s);
        }
        found.push(direction.clone());
        // a separated but non-oscillating source is still reported
        let (omega, phase, status) = match fit_cosine(&signal, &grid) {
            Ok(f) => (f.omega, f.phase, ComponentStatus::Converged),
            Err(e) => (0.0, 0.0, ComponentStatus::Interrupted(e.to_string())),
        };
        let loss = sica_loss(&signal, window.clone(), &z_grid)?;
        let raw_row = wh.raw_row(&direction);
        let record = RoundRecord {
            window_start: window.start,
            window_len: window.len(),
            dt: grid.dt(),
            frequency: omega,
            phase,
            loss,
            direction: direction.clone(),
            raw_row: raw_row.clone(),
            signal: signal.clone(),
        };
        components.push(ComponentResult {
            direction,
            signal,
            frequency: omega,
            phase,
            loss,
            frequency_history: vec![omega],
            window: window.clone(),
            raw_row,
            extraction_index: c,
            status,
            rounds: vec![record],
            negentropy: Some(j),
        });
    }
    components.sort_by(|a, b| a.frequency.total_cmp(&b.frequency).then(a.extraction_index.cmp(&b.extraction_index)));
    Ok(UnmixingSolution { components, failures, whitening_used: wh, config: MethodConfig::Negentropy(config.clone()) })
}
