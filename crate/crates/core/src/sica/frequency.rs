use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::optim::{brent_minimize, linear_lstsq};
use crate::signal::TimeGrid;

/// Zero-padding factor of the coarse spectral search.
pub const ZERO_PADDING: usize = 8;

/// Best-fit `a·cos(ωt + φ) + c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CosineFit {
    pub amplitude: f64,
    pub omega: f64,
    pub phase: f64,
    pub offset: f64,
    pub residual_ss: f64,
}

fn cosine_design(times: &[f64], omega: f64) -> DMatrix<f64> {
    DMatrix::from_fn(times.len(), 3, |i, j| match j {
        0 => (omega * times[i]).cos(),
        1 => (omega * times[i]).sin(),
        _ => 1.0,
    })
}

/// Least-squares residual of the best cosine at fixed `omega` (variable projection).
fn cosine_residual(times: &[f64], signal: &[f64], omega: f64) -> f64 {
    linear_lstsq(&cosine_design(times, omega), signal).map_or(f64::INFINITY, |(_, r)| r)
}

/// Angle wrapped into `[0, 2π)`.
pub fn wrap_phase(phi: f64) -> f64 {
    let p = phi.rem_euclid(TAU);
    if p >= TAU {
        0.0
    } else {
        p
    }
}

/// Location of the zero-padded DFT magnitude peak, as an angular frequency.
/// `None` when the peak sits at DC.
pub(crate) fn spectral_peak(signal: &[f64], dt: f64) -> Option<f64> {
    let n = signal.len();
    let mean = signal.iter().sum::<f64>() / n as f64;
    let n_pad = n * ZERO_PADDING;
    let mut buf: Vec<Complex<f64>> = signal.iter().map(|s| Complex::new(s - mean, 0.0)).collect();
    buf.resize(n_pad, Complex::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(n_pad).process(&mut buf);
    let (peak, _) = buf[..=n_pad / 2].iter().enumerate().fold((0, -1.0), |best, (k, c)| {
        if c.norm_sqr() > best.1 {
            (k, c.norm_sqr())
        } else {
            best
        }
    });
    if peak == 0 {
        None
    } else {
        Some(TAU * peak as f64 / (n_pad as f64 * dt))
    }
}

/// Full cosine fit: spectral peak, then nonlinear least squares in ω.
pub fn fit_cosine(signal: &[f64], grid: &TimeGrid) -> Result<CosineFit> {
    let n = signal.len();
    if n < 8 {
        return Err(Error::NoOscillation(format!("need at least 8 samples, got {n}")));
    }
    if n != grid.n_samples() {
        return Err(Error::DimensionMismatch { expected: grid.n_samples(), got: n });
    }
    let mean = signal.iter().sum::<f64>() / n as f64;
    let total_ss: f64 = signal.iter().map(|s| (s - mean).powi(2)).sum();
    let scale = signal.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    if total_ss <= (1e-12 * scale).powi(2) * n as f64 || total_ss == 0.0 {
        return Err(Error::NoOscillation("signal is constant".into()));
    }
    let dt = grid.dt();
    let omega0 = spectral_peak(signal, dt).ok_or_else(|| Error::NoOscillation("spectrum peaks at DC".into()))?;
    let times = grid.times();
    let pad_bin = TAU / ((n * ZERO_PADDING) as f64 * dt);
    let nyquist = PI / dt;

    // dense scan over ±1 unpadded bin, then Brent around the best node
    let lo = (omega0 - ZERO_PADDING as f64 * pad_bin).max(0.25 * pad_bin);
    let hi = (omega0 + ZERO_PADDING as f64 * pad_bin).min(nyquist);
    let nodes = 4 * ZERO_PADDING + 1;
    let step = (hi - lo) / (nodes - 1) as f64;
    let (best_i, _) = (0..nodes)
        .map(|i| (i, cosine_residual(&times, signal, lo + step * i as f64)))
        .fold((0, f64::INFINITY), |b, (i, r)| if r < b.1 { (i, r) } else { b });
    let a = (lo + step * (best_i as f64 - 1.0)).max(lo);
    let b = (lo + step * (best_i as f64 + 1.0)).min(hi);
    let (omega, _) = brent_minimize(|w| cosine_residual(&times, signal, w), a, b, 1e-13, 500);

    let (coef, residual_ss) = linear_lstsq(&cosine_design(&times, omega), signal)
        .ok_or_else(|| Error::NoOscillation("cosine basis is singular".into()))?;
    if !(residual_ss < total_ss) || !omega.is_finite() || omega <= 0.0 {
        return Err(Error::NoOscillation("fit does not explain the signal variance".into()));
    }
    // A cos + B sin = a cos(ωt + φ) with a cos φ = A, a sin φ = -B
    let amplitude = coef[0].hypot(coef[1]);
    let phase = wrap_phase((-coef[1]).atan2(coef[0]));
    Ok(CosineFit { amplitude, omega, phase, offset: coef[2], residual_ss })
}

/// Dominant angular frequency and phase of `signal`.
pub fn estimate_frequency(signal: &[f64], grid: &TimeGrid) -> Result<(f64, f64)> {
    let fit = fit_cosine(signal, grid)?;
    Ok((fit.omega, fit.phase))
}
