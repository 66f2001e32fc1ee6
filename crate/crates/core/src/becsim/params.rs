use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Harmonic trap and interaction parameters (ħ = 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrapParams {
    pub m: f64,
    pub omega_perp: f64,
    pub g: f64,
    pub n_atoms: f64,
}

impl Default for TrapParams {
    fn default() -> Self {
        Self { m: 1.0, omega_perp: 1.0, g: 10.0, n_atoms: 1000.0 }
    }
}

impl TrapParams {
    pub fn validate(&self) -> Result<()> {
        let ok = [self.m, self.omega_perp, self.g, self.n_atoms].iter().all(|v| v.is_finite() && *v > 0.0);
        if ok {
            Ok(())
        } else {
            Err(Error::param("trap parameters must be finite and positive"))
        }
    }

    /// Coefficient κ in V(r)/g = κ r².
    pub fn kappa(&self) -> f64 {
        0.5 * self.m * self.omega_perp * self.omega_perp / self.g
    }

    /// Unperturbed Thomas-Fermi chemical potential, √(N g m ω²/π).
    pub fn mu0(&self) -> f64 {
        (self.n_atoms * self.g * self.m * self.omega_perp * self.omega_perp / std::f64::consts::PI).sqrt()
    }

    /// Thomas-Fermi radius √(2μ₀/(mω²)).
    pub fn tf_radius(&self) -> f64 {
        (2.0 * self.mu0() / (self.m * self.omega_perp * self.omega_perp)).sqrt()
    }

    /// Central density μ₀/g.
    pub fn central_density(&self) -> f64 {
        self.mu0() / self.g
    }
}

/// Length and density scales of the mode shapes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ShapeUnits {
    /// δn₁ = n_c x/R, δn₂ = n_c (x²−y²)/R², δn₃ = n_c (x²+y²)/R² with the
    /// central density n_c and Thomas-Fermi radius R; f is the fractional
    /// amplitude at the cloud edge.
    #[default]
    Cloud,
    /// δn₁ = x, δn₂ = x²−y², δn₃ = x²+y² in oscillator units.
    Oscillator,
}

/// Dipole, quadrupole and breathing amplitudes and frequencies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModeSpec {
    pub amplitudes: [f64; 3],
    pub frequencies: [f64; 3],
    pub shape_units: ShapeUnits,
}

impl Default for ModeSpec {
    fn default() -> Self {
        Self { amplitudes: [0.2; 3], frequencies: [1.0, std::f64::consts::SQRT_2, 2.0], shape_units: ShapeUnits::Cloud }
    }
}

impl ModeSpec {
    pub fn with_amplitudes(amplitudes: [f64; 3]) -> Self {
        Self { amplitudes, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let w = self.frequencies;
        if w.iter().any(|v| !v.is_finite() || *v <= 0.0) || w[0] == w[1] || w[1] == w[2] || w[0] == w[2] {
            return Err(Error::param("mode frequencies must be positive and distinct"));
        }
        if self.amplitudes.iter().any(|a| !a.is_finite()) {
            return Err(Error::param("mode amplitudes must be finite"));
        }
        Ok(())
    }

    /// Unit-amplitude shapes (δn₁, δn₂, δn₃) at (x, y).
    pub fn shapes(&self, trap: &TrapParams, x: f64, y: f64) -> [f64; 3] {
        match self.shape_units {
            ShapeUnits::Oscillator => [x, x * x - y * y, x * x + y * y],
            ShapeUnits::Cloud => {
                let nc = trap.central_density();
                let (u, v) = (x / trap.tf_radius(), y / trap.tf_radius());
                [nc * u, nc * (u * u - v * v), nc * (u * u + v * v)]
            }
        }
    }

    /// Σ fᵢ δnᵢ(x, y) cos(ωᵢ t)
    pub fn perturbation(&self, trap: &TrapParams, x: f64, y: f64, t: f64) -> f64 {
        let s = self.shapes(trap, x, y);
        (0..3).map(|i| self.amplitudes[i] * s[i] * (self.frequencies[i] * t).cos()).sum()
    }
}

/// Uniform spatio-temporal noise on [−amplitude, amplitude].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSpec {
    pub amplitude: f64,
    pub rng_seed: u64,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self { amplitude: 0.1, rng_seed: 0 }
    }
}

impl NoiseSpec {
    pub fn off() -> Self {
        Self { amplitude: 0.0, rng_seed: 0 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.amplitude.is_finite() && self.amplitude >= 0.0 {
            Ok(())
        } else {
            Err(Error::param("noise amplitude must be finite and non-negative"))
        }
    }
}

/// Square grid of `n_points × n_points` nodes over [−L, L]².
/// Node values represent averages over the surrounding cell of side `spacing()`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpatialGrid {
    pub half_width: f64,
    pub n_points: usize,
}

impl SpatialGrid {
    pub fn new(half_width: f64, n_points: usize) -> Result<Self> {
        let g = Self { half_width, n_points };
        g.validate()?;
        Ok(g)
    }

    /// 101 × 101 nodes with L = 1.3 R_TF.
    pub fn for_trap(trap: &TrapParams) -> Self {
        Self { half_width: 1.3 * trap.tf_radius(), n_points: 101 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.half_width.is_finite() && self.half_width > 0.0) {
            return Err(Error::param("grid half_width must be positive"));
        }
        if self.n_points < 3 || self.n_points.is_multiple_of(2) {
            return Err(Error::param(format!("grid n_points must be odd and at least 3, got {}", self.n_points)));
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.n_points - 1) as f64
    }

    pub fn cell_area(&self) -> f64 {
        self.spacing().powi(2)
    }

    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.spacing()
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.coord(i)).collect()
    }

    pub fn len(&self) -> usize {
        self.n_points * self.n_points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Row-major index of node (column `ix`, row `iy`).
    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.n_points + ix
    }

    /// (x, y) of every node in row-major order.
    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        (0..self.n_points).flat_map(move |iy| (0..self.n_points).map(move |ix| (self.coord(ix), self.coord(iy))))
    }

    /// Nearest node (column, row) to (x, y).
    pub fn nearest(&self, x: f64, y: f64) -> Result<(usize, usize)> {
        let h = self.spacing();
        let lim = self.half_width + 0.5 * h;
        if !(x.abs() <= lim && y.abs() <= lim) {
            return Err(Error::PointOutsideGrid { x, y });
        }
        let to_i = |v: f64| (((v + self.half_width) / h).round() as usize).min(self.n_points - 1);
        Ok((to_i(x), to_i(y)))
    }
}
