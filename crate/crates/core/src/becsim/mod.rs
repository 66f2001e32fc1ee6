//! Two-dimensional Thomas-Fermi condensate with dipole, quadrupole and
//! breathing oscillations plus uniform spatio-temporal noise.

mod density;
mod movie;
mod params;

pub use density::{solve_chemical_potential, CellIntegrator, MU_REL_TOL};
pub use movie::{
    default_detector_points, generate_movie, noise_field, perturbation_field, render_frame, sample_detectors,
    tf_profile, DensityMovie, Frame, DEFAULT_DETECTORS_POLAR, DETECTORS_CSV, MOVIE_META,
};
pub use params::{ModeSpec, NoiseSpec, ShapeUnits, SpatialGrid, TrapParams};
