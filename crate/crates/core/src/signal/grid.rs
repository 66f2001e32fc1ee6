use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform sampling grid; sample `k` sits at `t0 + k * dt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTimeGrid")]
pub struct TimeGrid {
    t0: f64,
    dt: f64,
    n_samples: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTimeGrid {
    t0: f64,
    dt: f64,
    n_samples: usize,
}

impl TryFrom<RawTimeGrid> for TimeGrid {
    type Error = Error;

    fn try_from(r: RawTimeGrid) -> Result<Self> {
        TimeGrid::new(r.t0, r.dt, r.n_samples)
    }
}

impl TimeGrid {
    pub fn new(t0: f64, dt: f64, n_samples: usize) -> Result<Self> {
        if !t0.is_finite() || !dt.is_finite() || dt <= 0.0 {
            return Err(Error::param(format!("time grid needs finite t0 and dt > 0 (t0={t0}, dt={dt})")));
        }
        if n_samples < 2 {
            return Err(Error::param("time grid needs at least 2 samples"));
        }
        Ok(Self { t0, dt, n_samples })
    }

    /// `n_samples` points covering `[t0, t0 + duration)`.
    pub fn spanning(t0: f64, duration: f64, n_samples: usize) -> Result<Self> {
        Self::new(t0, duration / n_samples as f64, n_samples)
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.n_samples).map(|k| self.time(k)).collect()
    }

    pub fn full(&self) -> Range<usize> {
        0..self.n_samples
    }

    /// Number of samples in a window of the given duration.
    pub fn samples_for_duration(&self, duration: f64) -> usize {
        (duration / self.dt).round().max(0.0) as usize
    }

    /// Window of `duration` anchored at the first sample, clamped to the record.
    pub fn anchored_window(&self, duration: f64, min_len: usize) -> Range<usize> {
        let n = self.samples_for_duration(duration).max(min_len).min(self.n_samples);
        0..n
    }

    pub(crate) fn check_window(&self, window: &Range<usize>) -> Result<()> {
        if window.start >= window.end {
            return Err(Error::EmptyWindow);
        }
        if window.end > self.n_samples {
            return Err(Error::InvalidWindow { start: window.start, end: window.end, n_samples: self.n_samples });
        }
        Ok(())
    }
}
