#![allow(dead_code)]

use std::f64::consts::{PI, SQRT_2};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sica_core::becsim::default_detector_points;
use sica_core::*;

/// ln I₀(x) from the power series Σ (x/2)^{2k}/(k!)², summed until terms vanish.
pub fn ln_i0_series(x: f64) -> f64 {
    let q = x * x / 4.0;
    let (mut term, mut sum, mut k) = (1.0f64, 1.0f64, 0.0f64);
    loop {
        k += 1.0;
        term *= q / (k * k);
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    sum.ln()
}

/// Adaptive Simpson with an absolute tolerance, independent of the library one.
pub fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn rec<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            return left + right + (left + right - whole) / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// ln ∫ e^{zu} / (π √(2 − u²)) du over (−√2, √2). The endpoint singularity is
/// removed with u = √2 sin θ, which turns the density into dθ/π on (−π/2, π/2).
pub fn arcsine_cgf_quadrature(z: f64) -> f64 {
    let f = |th: f64| (z * SQRT_2 * th.sin()).exp() / PI;
    simpson(&f, -PI / 2.0, PI / 2.0, 1e-14).ln()
}

pub fn grid_400() -> TimeGrid {
    TimeGrid::new(0.0, 4.0 * PI / 400.0, 400).unwrap()
}

pub fn cosine(grid: &TimeGrid, omega: f64, phase: f64, amplitude: f64) -> Vec<f64> {
    grid.times().iter().map(|t| amplitude * (omega * t + phase).cos()).collect()
}

/// x = A s for sources given as rows.
pub fn mix(a: &[Vec<f64>], sources: &[Vec<f64>]) -> Vec<Vec<f64>> {
    a.iter()
        .map(|row| (0..sources[0].len()).map(|k| row.iter().zip(sources).map(|(r, s)| r * s[k]).sum()).collect())
        .collect()
}

pub fn random_matrix(rng: &mut ChaCha8Rng, m: usize) -> Vec<Vec<f64>> {
    (0..m).map(|_| (0..m).map(|_| rng.random_range(-1.0..1.0)).collect()).collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    sab / (saa * sbb).sqrt()
}

pub fn covariance(channels: &[Vec<f64>], window: std::ops::Range<usize>) -> Vec<Vec<f64>> {
    let n = window.len() as f64;
    let means: Vec<f64> = channels.iter().map(|c| c[window.clone()].iter().sum::<f64>() / n).collect();
    let m = channels.len();
    let mut out = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in 0..m {
            out[i][j] =
                window.clone().map(|k| (channels[i][k] - means[i]) * (channels[j][k] - means[j])).sum::<f64>() / n;
        }
    }
    out
}

/// Detector data of the three-mode benchmark for one noise seed.
pub fn benchmark_detectors(seed: u64) -> Ensemble {
    let trap = TrapParams::default();
    let grid = SpatialGrid::for_trap(&trap);
    let movie =
        generate_movie(&trap, &ModeSpec::default(), &NoiseSpec { amplitude: 0.1, rng_seed: seed }, &grid, &grid_400())
            .unwrap();
    sample_detectors(&movie, &default_detector_points(&trap)).unwrap()
}

pub const TRUE_FREQUENCIES: [f64; 3] = [1.0, SQRT_2, 2.0];

pub fn relative_errors(found: &[f64]) -> Vec<f64> {
    let mut f = found.to_vec();
    f.sort_by(f64::total_cmp);
    f.iter().zip(TRUE_FREQUENCIES).map(|(a, b)| (a / b - 1.0).abs()).collect()
}
