use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::becsim::density::{solve_mu, CellIntegrator};
use crate::becsim::{ModeSpec, NoiseSpec, SpatialGrid, TrapParams};
use crate::binio::{read_f64_le, read_json, write_f64_le, write_json};
use crate::error::{Error, Result};
use crate::signal::{Ensemble, TimeGrid};

/// One rendered density frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    /// Row-major cell-averaged densities, row = y index.
    pub density: Vec<f64>,
    pub mu: f64,
}

/// Noise field of frame `frame_index`: one ChaCha stream per frame, one draw per node.
pub fn noise_field(noise: &NoiseSpec, grid: &SpatialGrid, frame_index: u64) -> Vec<f64> {
    if noise.amplitude == 0.0 {
        return vec![0.0; grid.len()];
    }
    let mut rng = ChaCha8Rng::seed_from_u64(noise.rng_seed);
    rng.set_stream(frame_index);
    (0..grid.len()).map(|_| noise.amplitude * (2.0 * rng.random::<f64>() - 1.0)).collect()
}

/// Mode perturbation Σ fᵢ δnᵢ cos(ωᵢ t) at every node.
pub fn perturbation_field(trap: &TrapParams, modes: &ModeSpec, grid: &SpatialGrid, t: f64) -> Vec<f64> {
    grid.nodes().map(|(x, y)| modes.perturbation(trap, x, y, t)).collect()
}

/// Cell-averaged unperturbed Thomas-Fermi profile at chemical potential `mu`.
pub fn tf_profile(trap: &TrapParams, grid: &SpatialGrid, mu: f64) -> Vec<f64> {
    CellIntegrator::new(trap, grid).densities(mu, &vec![0.0; grid.len()])
}

fn validate(trap: &TrapParams, modes: &ModeSpec, noise: &NoiseSpec, grid: &SpatialGrid) -> Result<()> {
    trap.validate()?;
    modes.validate()?;
    noise.validate()?;
    grid.validate()
}

fn render_with(
    integrator: &CellIntegrator,
    trap: &TrapParams,
    modes: &ModeSpec,
    noise: &NoiseSpec,
    grid: &SpatialGrid,
    t: f64,
    frame_index: u64,
) -> Result<Frame> {
    let mut offsets = perturbation_field(trap, modes, grid, t);
    for (o, e) in offsets.iter_mut().zip(noise_field(noise, grid, frame_index)) {
        *o += e;
    }
    let mu = solve_mu(integrator, trap, &offsets)?;
    Ok(Frame { density: integrator.densities(mu, &offsets), mu })
}

/// Density at time `t`; `frame_index` keys the noise stream.
pub fn render_frame(
    trap: &TrapParams,
    modes: &ModeSpec,
    noise: &NoiseSpec,
    grid: &SpatialGrid,
    t: f64,
    frame_index: u64,
) -> Result<Frame> {
    validate(trap, modes, noise, grid)?;
    if !t.is_finite() {
        return Err(Error::param("frame time must be finite"));
    }
    render_with(&CellIntegrator::new(trap, grid), trap, modes, noise, grid, t, frame_index)
}

/// Simulated density movie with the configuration that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMovie {
    pub spatial_grid: SpatialGrid,
    pub time_grid: TimeGrid,
    pub frames: Vec<Vec<f64>>,
    pub mus: Vec<f64>,
    pub trap: TrapParams,
    pub modes: ModeSpec,
    pub noise: NoiseSpec,
}

pub fn generate_movie(
    trap: &TrapParams,
    modes: &ModeSpec,
    noise: &NoiseSpec,
    grid: &SpatialGrid,
    time_grid: &TimeGrid,
) -> Result<DensityMovie> {
    validate(trap, modes, noise, grid)?;
    let integrator = CellIntegrator::new(trap, grid);
    let rendered: Vec<Frame> = (0..time_grid.n_samples())
        .into_par_iter()
        .map(|k| render_with(&integrator, trap, modes, noise, grid, time_grid.time(k), k as u64))
        .collect::<Result<_>>()?;
    let (frames, mus) = rendered.into_iter().map(|f| (f.density, f.mu)).unzip();
    Ok(DensityMovie {
        spatial_grid: *grid,
        time_grid: *time_grid,
        frames,
        mus,
        trap: *trap,
        modes: *modes,
        noise: *noise,
    })
}

/// Detector points (r/R_TF, θ) used by default: one near the centre and two
/// near ±x at mid-radius, which keeps the linearised mixing well conditioned.
pub const DEFAULT_DETECTORS_POLAR: [(f64, f64); 3] = [(0.2, 1.3), (0.65, 0.25), (0.7, 3.4)];

pub fn default_detector_points(trap: &TrapParams) -> Vec<(f64, f64)> {
    let r = trap.tf_radius();
    DEFAULT_DETECTORS_POLAR.iter().map(|(f, th)| (f * r * th.cos(), f * r * th.sin())).collect()
}

impl DensityMovie {
    pub fn n_frames(&self) -> usize {
        self.frames.len()
    }

    /// Midpoint-rule atom number of frame `k`.
    pub fn atom_number(&self, k: usize) -> f64 {
        self.frames[k].iter().sum::<f64>() * self.spatial_grid.cell_area()
    }

    /// Time trace of node `index`.
    pub fn trace(&self, index: usize) -> Vec<f64> {
        self.frames.iter().map(|f| f[index]).collect()
    }

    /// Same movie with every frame replaced by `f(frame)`.
    pub fn map_frames(&self, f: impl Fn(&[f64]) -> Vec<f64>) -> Self {
        Self { frames: self.frames.iter().map(|fr| f(fr)).collect(), ..self.clone() }
    }
}

/// Nearest-node time traces at the given points.
pub fn sample_detectors(movie: &DensityMovie, points: &[(f64, f64)]) -> Result<Ensemble> {
    let grid = &movie.spatial_grid;
    let channels = points
        .iter()
        .map(|&(x, y)| {
            let (ix, iy) = grid.nearest(x, y)?;
            Ok(movie.trace(grid.index(ix, iy)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ensemble::new(movie.time_grid, channels)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MovieMeta {
    trap: TrapParams,
    modes: ModeSpec,
    noise: NoiseSpec,
    spatial_grid: SpatialGrid,
    time_grid: TimeGrid,
    layout: String,
    frame_files: Vec<String>,
    mus: Vec<f64>,
}

const LAYOUT: &str = "row-major f64 little-endian, row = y index";
pub const MOVIE_META: &str = "meta.json";
pub const DETECTORS_CSV: &str = "detectors.csv";

fn frame_file(k: usize) -> String {
    format!("frame_{k:05}.bin")
}

impl DensityMovie {
    /// Writes `meta.json`, one binary file per frame and, if given, `detectors.csv`.
    pub fn save(&self, dir: impl AsRef<Path>, detectors: Option<&Ensemble>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let frame_files: Vec<String> = (0..self.n_frames()).map(frame_file).collect();
        for (frame, name) in self.frames.iter().zip(&frame_files) {
            write_f64_le(dir.join(name), frame)?;
        }
        let meta = MovieMeta {
            trap: self.trap,
            modes: self.modes,
            noise: self.noise,
            spatial_grid: self.spatial_grid,
            time_grid: self.time_grid,
            layout: LAYOUT.into(),
            frame_files,
            mus: self.mus.clone(),
        };
        write_json(dir.join(MOVIE_META), &meta)?;
        if let Some(d) = detectors {
            d.write_csv_file(dir.join(DETECTORS_CSV))?;
        }
        Ok(())
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        if !dir.is_dir() {
            return Err(Error::io(dir, std::io::Error::new(std::io::ErrorKind::NotFound, "movie directory not found")));
        }
        let meta: MovieMeta = read_json(dir.join(MOVIE_META))?;
        meta.spatial_grid.validate()?;
        let frames = meta
            .frame_files
            .iter()
            .map(|name| {
                let path = dir.join(name);
                let f = read_f64_le(&path)?;
                if f.len() != meta.spatial_grid.len() {
                    return Err(Error::io(
                        &path,
                        std::io::Error::new(std::io::ErrorKind::InvalidData, "frame size does not match the grid"),
                    ));
                }
                Ok(f)
            })
            .collect::<Result<Vec<_>>>()?;
        if frames.len() != meta.time_grid.n_samples() {
            return Err(Error::param("frame count does not match the time grid"));
        }
        Ok(Self {
            spatial_grid: meta.spatial_grid,
            time_grid: meta.time_grid,
            frames,
            mus: meta.mus,
            trap: meta.trap,
            modes: meta.modes,
            noise: meta.noise,
        })
    }
}
