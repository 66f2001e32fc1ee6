//! Per-point amplitude fits of a density movie onto known mode frequencies.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::becsim::{DensityMovie, SpatialGrid};
use crate::binio::{read_f64_le, read_json, write_f64_le, write_json};
use crate::error::{Error, Result};
use crate::signal::fmt_f64;

/// Largest admissible condition number of the normal matrix.
pub const MAX_CONDITION: f64 = 1e8;
/// Points with more than this fraction of exactly-zero frames count as clipped.
pub const CLIPPED_FRACTION: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FitOptions {
    /// Add sin(ωᵢt) columns next to the cosines.
    pub with_sine: bool,
}

/// Background and mode amplitude maps.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeMap {
    pub spatial_grid: SpatialGrid,
    pub c0: Vec<f64>,
    pub c: [Vec<f64>; 3],
    /// Sine amplitudes, present when fitted with `with_sine`.
    pub s: Option<[Vec<f64>; 3]>,
    pub frequencies: [f64; 3],
    pub residual_rms: Vec<f64>,
    pub clipped: Vec<bool>,
}

/// Least-squares basis shared by all grid points.
#[derive(Debug, Clone)]
pub struct HarmonicBasis {
    design: DMatrix<f64>,
    gram_inv: DMatrix<f64>,
    pub condition: f64,
}

impl HarmonicBasis {
    pub fn new(times: &[f64], frequencies: &[f64; 3], options: FitOptions) -> Result<Self> {
        if frequencies.iter().any(|w| !w.is_finite() || *w <= 0.0) {
            return Err(Error::param("fit frequencies must be positive"));
        }
        let cols = if options.with_sine { 7 } else { 4 };
        let design = DMatrix::from_fn(times.len(), cols, |k, j| match j {
            0 => 1.0,
            1..=3 => (frequencies[j - 1] * times[k]).cos(),
            _ => (frequencies[j - 4] * times[k]).sin(),
        });
        let gram = design.transpose() * &design;
        let eig = gram.clone().symmetric_eigen();
        let (lo, hi) = (eig.eigenvalues.min(), eig.eigenvalues.max());
        let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
        if !(condition <= MAX_CONDITION) {
            return Err(Error::IllConditionedBasis { cond: condition });
        }
        let gram_inv = gram.cholesky().ok_or(Error::IllConditionedBasis { cond: condition })?.inverse();
        Ok(Self { design, gram_inv, condition })
    }

    /// Coefficients and residual RMS for one trace.
    pub fn fit(&self, trace: &[f64]) -> (DVector<f64>, f64) {
        let y = DVector::from_column_slice(trace);
        let coef = &self.gram_inv * (self.design.transpose() * &y);
        let resid = y - &self.design * &coef;
        (coef, (resid.norm_squared() / trace.len() as f64).sqrt())
    }

    pub fn design(&self) -> &DMatrix<f64> {
        &self.design
    }
}

pub fn fit_amplitudes(movie: &DensityMovie, frequencies: [f64; 3]) -> Result<ModeMap> {
    fit_amplitudes_with(movie, frequencies, FitOptions::default())
}

pub fn fit_amplitudes_with(movie: &DensityMovie, frequencies: [f64; 3], options: FitOptions) -> Result<ModeMap> {
    if movie.n_frames() < 8 {
        return Err(Error::param("mode fit needs at least 8 frames"));
    }
    let basis = HarmonicBasis::new(&movie.time_grid.times(), &frequencies, options)?;
    let n_frames = movie.n_frames();
    let points: Vec<(DVector<f64>, f64, bool)> = (0..movie.spatial_grid.len())
        .into_par_iter()
        .map(|i| {
            let trace = movie.trace(i);
            let zeros = trace.iter().filter(|v| **v == 0.0).count();
            let (coef, rms) = basis.fit(&trace);
            (coef, rms, zeros as f64 > CLIPPED_FRACTION * n_frames as f64)
        })
        .collect();
    let col = |j: usize| points.iter().map(|p| p.0[j]).collect::<Vec<f64>>();
    Ok(ModeMap {
        spatial_grid: movie.spatial_grid,
        c0: col(0),
        c: [col(1), col(2), col(3)],
        s: options.with_sine.then(|| [col(4), col(5), col(6)]),
        frequencies,
        residual_rms: points.iter().map(|p| p.1).collect(),
        clipped: points.iter().map(|p| p.2).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeKind {
    Dipole,
    Quadrupole,
    Breathing,
}

impl ModeKind {
    pub const ALL: [ModeKind; 3] = [ModeKind::Dipole, ModeKind::Quadrupole, ModeKind::Breathing];
}

/// Ideal spatial pattern of a mode over the grid, restricted to `mask`.
pub fn ideal_pattern(mode: ModeKind, grid: &SpatialGrid, mask: Option<&[bool]>) -> Vec<f64> {
    let inside = |i: usize| mask.is_none_or(|m| m[i]);
    let raw: Vec<f64> = grid
        .nodes()
        .map(|(x, y)| match mode {
            ModeKind::Dipole => x,
            ModeKind::Quadrupole => x * x - y * y,
            ModeKind::Breathing => x * x + y * y,
        })
        .collect();
    let mean_r2 = if mode == ModeKind::Breathing {
        let (s, n) =
            raw.iter().enumerate().filter(|(i, _)| inside(*i)).fold((0.0, 0usize), |(s, n), (_, v)| (s + v, n + 1));
        if n > 0 {
            s / n as f64
        } else {
            0.0
        }
    } else {
        0.0
    };
    raw.iter().enumerate().map(|(i, v)| if inside(i) { v - mean_r2 } else { 0.0 }).collect()
}

/// Normalised inner product of `map` with the ideal pattern over the masked
/// points; +1 is a perfect match, 0 if either side vanishes.
pub fn mode_symmetry_score(map: &[f64], mode: ModeKind, grid: &SpatialGrid, mask: Option<&[bool]>) -> f64 {
    let pattern = ideal_pattern(mode, grid, mask);
    let inside = |i: usize| mask.is_none_or(|m| m[i]);
    let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
    for (i, (a, b)) in map.iter().zip(&pattern).enumerate() {
        if inside(i) {
            dot += a * b;
            na += a * a;
            nb += b * b;
        }
    }
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        (dot / (na.sqrt() * nb.sqrt())).clamp(-1.0, 1.0)
    }
}

impl ModeMap {
    /// Mask of points that are not clipped.
    pub fn cloud_mask(&self) -> Vec<bool> {
        self.clipped.iter().map(|c| !c).collect()
    }

    /// Symmetry scores of C₁, C₂, C₃ against dipole, quadrupole, breathing patterns.
    pub fn symmetry_scores(&self) -> [f64; 3] {
        let mask = self.cloud_mask();
        let mut out = [0.0; 3];
        for (i, mode) in ModeKind::ALL.iter().enumerate() {
            out[i] = mode_symmetry_score(&self.c[i], *mode, &self.spatial_grid, Some(&mask));
        }
        out
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModeMapMeta {
    spatial_grid: SpatialGrid,
    frequencies: [f64; 3],
    layout: String,
    arrays: Vec<String>,
    clipped_points: Vec<usize>,
    symmetry_scores: [f64; 3],
}

pub const MODEMAP_META: &str = "modemap.json";
const ARRAYS: [&str; 5] = ["c0.bin", "c1.bin", "c2.bin", "c3.bin", "residual_rms.bin"];

impl ModeMap {
    /// Writes `modemap.json`, the coefficient arrays and optionally `modemap.csv`.
    pub fn save(&self, dir: impl AsRef<Path>, with_csv: bool) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let arrays = [&self.c0, &self.c[0], &self.c[1], &self.c[2], &self.residual_rms];
        for (name, a) in ARRAYS.iter().zip(arrays) {
            write_f64_le(dir.join(name), a)?;
        }
        let meta = ModeMapMeta {
            spatial_grid: self.spatial_grid,
            frequencies: self.frequencies,
            layout: "row-major f64 little-endian, row = y index".into(),
            arrays: ARRAYS.iter().map(|s| s.to_string()).collect(),
            clipped_points: self.clipped.iter().enumerate().filter(|(_, c)| **c).map(|(i, _)| i).collect(),
            symmetry_scores: self.symmetry_scores(),
        };
        write_json(dir.join(MODEMAP_META), &meta)?;
        if with_csv {
            let mut text = String::from("x,y,C0,C1,C2,C3\n");
            for (i, (x, y)) in self.spatial_grid.nodes().enumerate() {
                let row = [x, y, self.c0[i], self.c[0][i], self.c[1][i], self.c[2][i]];
                text.push_str(&row.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>().join(","));
                text.push('\n');
            }
            let path = dir.join("modemap.csv");
            std::fs::write(&path, text).map_err(|e| Error::io(path, e))?;
        }
        Ok(())
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let meta: ModeMapMeta = read_json(dir.join(MODEMAP_META))?;
        let mut arrays = ARRAYS.iter().map(|n| read_f64_le(dir.join(n))).collect::<Result<Vec<_>>>()?;
        let n = meta.spatial_grid.len();
        if arrays.iter().any(|a| a.len() != n) {
            return Err(Error::param("mode map arrays do not match the grid"));
        }
        let residual_rms = arrays.pop().expect("five arrays");
        let c3 = arrays.pop().expect("c3");
        let c2 = arrays.pop().expect("c2");
        let c1 = arrays.pop().expect("c1");
        let c0 = arrays.pop().expect("c0");
        let mut clipped = vec![false; n];
        for i in meta.clipped_points {
            if i < n {
                clipped[i] = true;
            }
        }
        Ok(Self {
            spatial_grid: meta.spatial_grid,
            c0,
            c: [c1, c2, c3],
            s: None,
            frequencies: meta.frequencies,
            residual_rms,
            clipped,
        })
    }
}
