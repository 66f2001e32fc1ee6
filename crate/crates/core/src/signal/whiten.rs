use std::ops::Range;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::signal::{Ensemble, TimeGrid};

/// Smallest admissible covariance eigenvalue, relative to the largest.
pub const RANK_TOLERANCE: f64 = 1e-12;

/// Channels after centering and symmetric (ZCA) whitening over `window`.
///
/// The transform is applied to the whole record; the zero-mean and
/// identity-covariance properties hold over `window` only.
#[derive(Debug, Clone, PartialEq)]
pub struct WhitenedEnsemble {
    grid: TimeGrid,
    channels: Vec<Vec<f64>>,
    means: Vec<f64>,
    whitening_matrix: DMatrix<f64>,
    dewhitening_matrix: DMatrix<f64>,
    window: Range<usize>,
}

impl WhitenedEnsemble {
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn channels(&self) -> &[Vec<f64>] {
        &self.channels
    }

    pub fn n_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    /// Σ^{-1/2} of the window covariance.
    pub fn whitening_matrix(&self) -> &DMatrix<f64> {
        &self.whitening_matrix
    }

    /// Σ^{1/2}, the inverse of the whitening matrix.
    pub fn dewhitening_matrix(&self) -> &DMatrix<f64> {
        &self.dewhitening_matrix
    }

    pub fn window(&self) -> Range<usize> {
        self.window.clone()
    }

    /// Whitened sample `k` as a vector.
    pub fn sample(&self, k: usize) -> DVector<f64> {
        DVector::from_iterator(self.channels.len(), self.channels.iter().map(|c| c[k]))
    }

    /// Reinterprets the whitened channels as a raw ensemble.
    pub fn to_ensemble(&self) -> Ensemble {
        Ensemble::new(self.grid, self.channels.clone()).expect("whitened channels are finite")
    }

    /// Maps a whitened-frame direction `d` to the raw-space unmixing row `u`,
    /// so that `d·x_white = u·(x - means)`.
    pub fn raw_row(&self, direction: &[f64]) -> Vec<f64> {
        let d = DVector::from_column_slice(direction);
        (&self.whitening_matrix * d).iter().copied().collect()
    }

    /// Direction in this frame whose projection is proportional to `u·(x - means)`.
    /// Not normalised.
    pub fn frame_direction(&self, raw_row: &[f64]) -> Vec<f64> {
        let u = DVector::from_column_slice(raw_row);
        (&self.dewhitening_matrix * u).iter().copied().collect()
    }
}

/// Window mean and population covariance.
pub fn window_moments(channels: &[Vec<f64>], window: &Range<usize>) -> (Vec<f64>, DMatrix<f64>) {
    let m = channels.len();
    let n = window.len() as f64;
    let means: Vec<f64> = channels.iter().map(|c| c[window.clone()].iter().sum::<f64>() / n).collect();
    let mut cov = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let s: f64 = window.clone().map(|k| (channels[i][k] - means[i]) * (channels[j][k] - means[j])).sum();
            cov[(i, j)] = s / n;
            cov[(j, i)] = s / n;
        }
    }
    (means, cov)
}

/// Centers and whitens `raw` using statistics over `window`.
pub fn whiten(raw: &Ensemble, window: Range<usize>) -> Result<WhitenedEnsemble> {
    raw.grid().check_window(&window)?;
    let m = raw.n_channels();
    if window.len() < m + 1 {
        return Err(Error::WindowTooShort { len: window.len(), channels: m });
    }
    let (means, cov) = window_moments(raw.channels(), &window);
    let eig = cov.symmetric_eigen();
    let max = eig.eigenvalues.max();
    let min = eig.eigenvalues.min();
    if !(max > 0.0) || min <= RANK_TOLERANCE * max {
        let ratio = if max > 0.0 { min / max } else { 0.0 };
        return Err(Error::RankDeficient { ratio });
    }
    let v = &eig.eigenvectors;
    let inv_sqrt = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()));
    let sqrt = DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt));
    let w = v * inv_sqrt * v.transpose();
    let w = (&w + w.transpose()) * 0.5;
    let dw = v * sqrt * v.transpose();
    let dw = (&dw + dw.transpose()) * 0.5;

    let n = raw.n_samples();
    let mut channels = vec![vec![0.0; n]; m];
    let mut centred = vec![0.0; m];
    for k in 0..n {
        for ((c, ch), mean) in centred.iter_mut().zip(raw.channels()).zip(means.iter()) {
            *c = ch[k] - mean;
        }
        for i in 0..m {
            let mut acc = 0.0;
            for j in 0..m {
                acc += w[(i, j)] * centred[j];
            }
            channels[i][k] = acc;
        }
    }
    Ok(WhitenedEnsemble { grid: *raw.grid(), channels, means, whitening_matrix: w, dewhitening_matrix: dw, window })
}

/// Per-sample dot product of `direction` with the whitened channels.
pub fn project(whitened: &WhitenedEnsemble, direction: &[f64]) -> Result<Vec<f64>> {
    let m = whitened.n_channels();
    if direction.len() != m {
        return Err(Error::DimensionMismatch { expected: m, got: direction.len() });
    }
    let n = whitened.grid().n_samples();
    let mut out = vec![0.0; n];
    for (d, ch) in direction.iter().zip(whitened.channels()) {
        for (o, x) in out.iter_mut().zip(ch) {
            *o += d * x;
        }
    }
    Ok(out)
}
