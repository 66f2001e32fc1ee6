use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optim::levenberg_marquardt;
use crate::sica::{fit_cosine, wrap_phase};
use crate::signal::TimeGrid;

/// Best-fit `a·e^{−γt}·cos(ωt + φ) + c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DampedFit {
    pub amplitude: f64,
    pub omega: f64,
    pub gamma: f64,
    pub phase: f64,
    pub offset: f64,
    pub residual_rms: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DampedFitOptions {
    /// Hold γ at this value instead of fitting it.
    pub fixed_gamma: Option<f64>,
}

pub fn damped_cosine_fit(signal: &[f64], grid: &TimeGrid) -> Result<DampedFit> {
    damped_cosine_fit_with(signal, grid, DampedFitOptions::default())
}

pub fn damped_cosine_fit_with(signal: &[f64], grid: &TimeGrid, options: DampedFitOptions) -> Result<DampedFit> {
    let n = signal.len();
    if n < 16 {
        return Err(Error::FitDiverged(format!("need at least 16 samples, got {n}")));
    }
    let start = fit_cosine(signal, grid).map_err(|e| Error::FitDiverged(format!("no initial estimate: {e}")))?;
    let times = grid.times();
    let fixed = options.fixed_gamma;
    if let Some(g) = fixed {
        if !(g >= 0.0) {
            return Err(Error::param("fixed gamma must be non-negative"));
        }
    }
    // parameter vector: [a, ω, φ, c, γ?]
    let unpack = |p: &[f64]| (p[0], p[1], p[2], p[3], fixed.unwrap_or_else(|| p[4]));
    let model = |p: &[f64]| {
        let (a, w, phi, c, g) = unpack(p);
        let cols = if fixed.is_some() { 4 } else { 5 };
        let mut r = DVector::zeros(n);
        let mut jac = DMatrix::zeros(n, cols);
        for (i, &t) in times.iter().enumerate() {
            let e = (-g * t).exp();
            let (sn, cs) = (w * t + phi).sin_cos();
            r[i] = a * e * cs + c - signal[i];
            jac[(i, 0)] = e * cs;
            jac[(i, 1)] = -a * e * sn * t;
            jac[(i, 2)] = -a * e * sn;
            jac[(i, 3)] = 1.0;
            if cols == 5 {
                jac[(i, 4)] = -t * a * e * cs;
            }
        }
        (r, jac)
    };
    let clamp = |p: &mut [f64]| {
        if p.len() == 5 && p[4] < 0.0 {
            p[4] = 0.0;
        }
    };
    let mut p0 = vec![start.amplitude, start.omega, start.phase, start.offset];
    if fixed.is_none() {
        p0.push(0.0);
    }
    let fit = levenberg_marquardt(model, clamp, &p0, 500, 1e-14);
    let (mut a, w, mut phi, c, g) = unpack(&fit.params);
    if !fit.cost.is_finite() || fit.params.iter().any(|v| !v.is_finite()) || !(w > 0.0) {
        return Err(Error::FitDiverged("non-finite or non-positive parameters".into()));
    }
    if a < 0.0 {
        a = -a;
        phi += std::f64::consts::PI;
    }
    Ok(DampedFit {
        amplitude: a,
        omega: w,
        gamma: g,
        phase: wrap_phase(phi),
        offset: c,
        residual_rms: (fit.cost / n as f64).sqrt(),
    })
}
