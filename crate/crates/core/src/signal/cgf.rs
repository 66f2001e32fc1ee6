use std::ops::Range;

use crate::error::{Error, Result};

/// Empirical cumulant-generating function on a list of `z` values.
#[derive(Debug, Clone, PartialEq)]
pub struct CgfEstimate {
    pub z_values: Vec<f64>,
    pub k_values: Vec<f64>,
}

/// `log(mean(exp(z * s)))` over the window, evaluated with a max shift.
pub fn log_mean_exp(signal: &[f64], z: f64) -> f64 {
    if z == 0.0 {
        return 0.0;
    }
    let shift = signal.iter().map(|s| z * s).fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = signal.iter().map(|s| (z * s - shift).exp()).sum();
    shift + (sum / signal.len() as f64).ln()
}

pub fn empirical_cgf(signal: &[f64], window: Range<usize>, z_values: &[f64]) -> Result<CgfEstimate> {
    if window.is_empty() {
        return Err(Error::EmptyWindow);
    }
    if window.end > signal.len() {
        return Err(Error::InvalidWindow { start: window.start, end: window.end, n_samples: signal.len() });
    }
    if let Some(z) = z_values.iter().find(|z| !z.is_finite()) {
        return Err(Error::param(format!("non-finite z value {z}")));
    }
    let s = &signal[window];
    let k_values = z_values.iter().map(|&z| log_mean_exp(s, z)).collect();
    Ok(CgfEstimate { z_values: z_values.to_vec(), k_values })
}
