use crate::becsim::{SpatialGrid, TrapParams};
use crate::error::{Error, Result};
use crate::special::gauss_legendre_16;

/// Geometry of one grid cell, precomputed for repeated integration.
#[derive(Debug, Clone, Copy)]
struct Cell {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    r2_min: f64,
    r2_max: f64,
    /// ∫∫ (x² + y²) dx dy over the cell
    moment2: f64,
}

impl Cell {
    fn new(xc: f64, yc: f64, h: f64) -> Self {
        let (x0, x1, y0, y1) = (xc - 0.5 * h, xc + 0.5 * h, yc - 0.5 * h, yc + 0.5 * h);
        let near = |a: f64, b: f64| if a <= 0.0 && b >= 0.0 { 0.0 } else { a.abs().min(b.abs()) };
        let far = |a: f64, b: f64| a.abs().max(b.abs());
        let r2_min = near(x0, x1).powi(2) + near(y0, y1).powi(2);
        let r2_max = far(x0, x1).powi(2) + far(y0, y1).powi(2);
        let moment2 = h * (x1.powi(3) - x0.powi(3)) / 3.0 + h * (y1.powi(3) - y0.powi(3)) / 3.0;
        Self { x0, x1, y0, y1, r2_min, r2_max, moment2 }
    }

    /// ∫∫ max(0, a − κ(x² + y²)) over the cell.
    fn integral(&self, a: f64, kappa: f64, area: f64) -> f64 {
        if a <= kappa * self.r2_min {
            return 0.0;
        }
        if a >= kappa * self.r2_max {
            return a * area - kappa * self.moment2;
        }
        self.boundary_integral(a, kappa)
    }

    fn boundary_integral(&self, a: f64, kappa: f64) -> f64 {
        let (y0, y1) = (self.y0, self.y1);
        // F(x) = ∫ max(0, b − κy²) dy over [y0, y1], b = a − κx²
        let inner = |x: f64| {
            let b = a - kappa * x * x;
            if b <= 0.0 {
                return 0.0;
            }
            let rho = (b / kappa).sqrt();
            let ya = y0.max(-rho);
            let yb = y1.min(rho);
            if ya >= yb {
                0.0
            } else {
                b * (yb - ya) - kappa * (yb.powi(3) - ya.powi(3)) / 3.0
            }
        };
        // F is smooth between the x where ρ(x) crosses 0, |y0| or |y1|
        let mut breaks = vec![self.x0, self.x1];
        for yy in [0.0, y0 * y0, y1 * y1] {
            let x2 = a / kappa - yy;
            if x2 > 0.0 {
                let xb = x2.sqrt();
                for xb in [xb, -xb] {
                    if xb > self.x0 && xb < self.x1 {
                        breaks.push(xb);
                    }
                }
            }
        }
        breaks.sort_by(f64::total_cmp);
        let (nodes, weights) = gauss_legendre_16();
        let mut total = 0.0;
        for w in breaks.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            if hi <= lo {
                continue;
            }
            let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
            total += half * nodes.iter().zip(weights).map(|(u, wt)| wt * inner(mid + half * u)).sum::<f64>();
        }
        total
    }
}

/// Cell-averaged clipped density `max(0, (μ − V)/g + offset)` for a grid and trap.
///
/// The trap part varies inside each cell and is integrated exactly; the
/// per-node offset (mode perturbation plus noise) is constant over its cell.
#[derive(Debug, Clone)]
pub struct CellIntegrator {
    cells: Vec<Cell>,
    kappa: f64,
    g: f64,
    area: f64,
}

impl CellIntegrator {
    pub fn new(trap: &TrapParams, grid: &SpatialGrid) -> Self {
        let h = grid.spacing();
        let cells = grid.nodes().map(|(x, y)| Cell::new(x, y, h)).collect();
        Self { cells, kappa: trap.kappa(), g: trap.g, area: h * h }
    }

    /// Total atom number for chemical potential `mu`.
    pub fn atom_number(&self, mu: f64, offsets: &[f64]) -> f64 {
        let base = mu / self.g;
        self.cells.iter().zip(offsets).map(|(c, o)| c.integral(base + o, self.kappa, self.area)).sum()
    }

    /// Cell-averaged densities for chemical potential `mu`.
    pub fn densities(&self, mu: f64, offsets: &[f64]) -> Vec<f64> {
        let base = mu / self.g;
        self.cells
            .iter()
            .zip(offsets)
            .map(|(c, o)| (c.integral(base + o, self.kappa, self.area) / self.area).max(0.0))
            .collect()
    }
}

/// Chemical potential conserving the atom number for the given perturbation and
/// noise fields (row-major node arrays, density units).
pub fn solve_chemical_potential(
    trap: &TrapParams,
    perturbation: &[f64],
    noise_frame: &[f64],
    grid: &SpatialGrid,
) -> Result<f64> {
    trap.validate()?;
    grid.validate()?;
    if perturbation.len() != grid.len() || noise_frame.len() != grid.len() {
        return Err(Error::DimensionMismatch { expected: grid.len(), got: perturbation.len().min(noise_frame.len()) });
    }
    let offsets: Vec<f64> = perturbation.iter().zip(noise_frame).map(|(p, e)| p + e).collect();
    solve_mu(&CellIntegrator::new(trap, grid), trap, &offsets)
}

/// Relative atom-number tolerance of the solver.
pub const MU_REL_TOL: f64 = 1e-12;

pub(crate) fn solve_mu(integrator: &CellIntegrator, trap: &TrapParams, offsets: &[f64]) -> Result<f64> {
    if offsets.iter().any(|o| !o.is_finite()) {
        return Err(Error::BracketingFailed);
    }
    let target = trap.n_atoms;
    let f = |mu: f64| integrator.atom_number(mu, offsets) - target;
    let mu0 = trap.mu0();
    let mut step = 0.05 * mu0;
    let (mut lo, mut hi) = (mu0, mu0);
    let (mut flo, mut fhi) = (f(lo), f(hi));
    let mut expansions = 0;
    while flo > 0.0 {
        lo -= step;
        step *= 2.0;
        flo = f(lo);
        expansions += 1;
        if expansions > 200 || !flo.is_finite() {
            return Err(Error::BracketingFailed);
        }
    }
    step = 0.05 * mu0;
    while fhi < 0.0 {
        hi += step;
        step *= 2.0;
        fhi = f(hi);
        expansions += 1;
        if expansions > 400 || !fhi.is_finite() {
            return Err(Error::BracketingFailed);
        }
    }
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    // Illinois variant of regula falsi
    let tol = MU_REL_TOL * target;
    let mut side = 0i8;
    let mut best = if flo.abs() < fhi.abs() { (lo, flo) } else { (hi, fhi) };
    for _ in 0..500 {
        let mu = (lo * fhi - hi * flo) / (fhi - flo);
        let mu = if mu > lo && mu < hi { mu } else { 0.5 * (lo + hi) };
        let fm = f(mu);
        if fm.abs() < best.1.abs() {
            best = (mu, fm);
        }
        if fm.abs() <= tol || (hi - lo) <= 4.0 * f64::EPSILON * mu.abs().max(1.0) {
            break;
        }
        if fm < 0.0 {
            lo = mu;
            flo = fm;
            if side == -1 {
                fhi *= 0.5;
            }
            side = -1;
        } else {
            hi = mu;
            fhi = fm;
            if side == 1 {
                flo *= 0.5;
            }
            side = 1;
        }
    }
    if best.1.abs() <= 1e-6 * target {
        Ok(best.0)
    } else {
        Err(Error::BracketingFailed)
    }
}
