use std::ops::Range;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::sica::ZGrid;
use crate::signal::{log_mean_exp, WhitenedEnsemble};
use crate::special::ln_bessel_i0;

/// CGF of a unit-variance cosine sampled over whole periods: `ln I₀(√2 z)`.
pub fn reference_cgf(z: f64) -> f64 {
    ln_bessel_i0(std::f64::consts::SQRT_2 * z)
}

/// Σᵢ (K̂(zᵢ) − K_ref(zᵢ))² over the window.
pub fn sica_loss(signal: &[f64], window: Range<usize>, z_grid: &ZGrid) -> Result<f64> {
    if window.is_empty() {
        return Err(Error::EmptyWindow);
    }
    if window.end > signal.len() {
        return Err(Error::InvalidWindow { start: window.start, end: window.end, n_samples: signal.len() });
    }
    let s = &signal[window];
    Ok(z_grid
        .values()
        .iter()
        .map(|&z| {
            let r = log_mean_exp(s, z) - reference_cgf(z);
            r * r
        })
        .sum())
}

/// Largest |K̂(z) − K_ref(z)| over the grid.
pub fn max_cgf_deviation(signal: &[f64], window: Range<usize>, z_grid: &ZGrid) -> Result<f64> {
    if window.is_empty() {
        return Err(Error::EmptyWindow);
    }
    let s = &signal[window];
    Ok(z_grid.values().iter().map(|&z| (log_mean_exp(s, z) - reference_cgf(z)).abs()).fold(0.0, f64::max))
}

/// Whitened samples of one window packed row-major (`n × m`).
#[derive(Debug, Clone)]
pub(crate) struct WindowData {
    pub m: usize,
    pub n: usize,
    pub xs: Vec<f64>,
}

impl WindowData {
    pub fn new(whitened: &WhitenedEnsemble, window: Range<usize>) -> Self {
        let m = whitened.n_channels();
        let n = window.len();
        let mut xs = Vec::with_capacity(n * m);
        for k in window {
            for ch in whitened.channels() {
                xs.push(ch[k]);
            }
        }
        Self { m, n, xs }
    }

    fn row(&self, k: usize) -> &[f64] {
        &self.xs[k * self.m..(k + 1) * self.m]
    }

    pub fn project(&self, w: &[f64]) -> Vec<f64> {
        (0..self.n).map(|k| self.row(k).iter().zip(w).map(|(x, w)| x * w).sum()).collect()
    }

    pub fn loss(&self, w: &[f64], z_grid: &ZGrid, k_ref: &[f64]) -> f64 {
        let s = self.project(w);
        z_grid
            .values()
            .iter()
            .zip(k_ref)
            .map(|(&z, kr)| {
                let r = log_mean_exp(&s, z) - kr;
                r * r
            })
            .sum()
    }

    /// Loss, gradient and Hessian with respect to the unconstrained `w`.
    pub fn loss_derivatives(&self, w: &[f64], z_grid: &ZGrid, k_ref: &[f64]) -> (f64, DVector<f64>, DMatrix<f64>) {
        let m = self.m;
        let s = self.project(w);
        let mut loss = 0.0;
        let mut grad = DVector::zeros(m);
        let mut hess = DMatrix::zeros(m, m);
        let mut p = vec![0.0; self.n];
        let mut mu1 = vec![0.0; m];
        let mut mu2 = vec![0.0; m * m];
        for (&z, kr) in z_grid.values().iter().zip(k_ref) {
            let shift = s.iter().map(|v| z * v).fold(f64::NEG_INFINITY, f64::max);
            let mut total = 0.0;
            for (pk, sk) in p.iter_mut().zip(&s) {
                *pk = (z * sk - shift).exp();
                total += *pk;
            }
            let k_hat = shift + (total / self.n as f64).ln();
            let r = k_hat - kr;
            loss += r * r;

            mu1.iter_mut().for_each(|v| *v = 0.0);
            mu2.iter_mut().for_each(|v| *v = 0.0);
            for (k, pk) in p.iter().enumerate() {
                let wk = pk / total;
                let x = self.row(k);
                for i in 0..m {
                    let wx = wk * x[i];
                    mu1[i] += wx;
                    for j in i..m {
                        mu2[i * m + j] += wx * x[j];
                    }
                }
            }
            // ∇K = z μ₁,  ∇²K = z² (μ₂ − μ₁μ₁ᵀ)
            for i in 0..m {
                let gi = z * mu1[i];
                grad[i] += 2.0 * r * gi;
                for j in i..m {
                    let gj = z * mu1[j];
                    let hk = z * z * (mu2[i * m + j] - mu1[i] * mu1[j]);
                    let h = 2.0 * (gi * gj + r * hk);
                    hess[(i, j)] += h;
                    if i != j {
                        hess[(j, i)] += h;
                    }
                }
            }
        }
        (loss, grad, hess)
    }
}

pub(crate) fn reference_values(z_grid: &ZGrid) -> Vec<f64> {
    z_grid.values().iter().map(|&z| reference_cgf(z)).collect()
}

/// Analytic gradient and Hessian of `sica_loss(project(whitened, w))` at `direction`.
pub fn loss_gradient_hessian(
    whitened: &WhitenedEnsemble,
    direction: &[f64],
    window: Range<usize>,
    z_grid: &ZGrid,
) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let m = whitened.n_channels();
    if direction.len() != m {
        return Err(Error::DimensionMismatch { expected: m, got: direction.len() });
    }
    whitened.grid().check_window(&window)?;
    let data = WindowData::new(whitened, window);
    let (_, g, h) = data.loss_derivatives(direction, z_grid, &reference_values(z_grid));
    Ok((g, h))
}
