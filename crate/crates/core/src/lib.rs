//! Blind separation of single-frequency oscillation modes by matching
//! empirical cumulant-generating functions to that of a pure cosine.
//!
//! Modules:
//! - [`signal`]: time grids, ensembles, whitening, empirical CGFs
//! - [`sica`]: the cumulant-matching extraction and window refinement
//! - [`baseline`]: negentropy ICA and a damped-cosine fit
//! - [`becsim`]: condensate collective-mode movie simulator
//! - [`modefit`]: per-point amplitude maps at known frequencies

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baseline;
pub mod becsim;
pub mod binio;
pub mod error;
pub mod export;
pub mod modefit;
pub mod optim;
pub mod sica;
pub mod signal;
pub mod special;

pub use baseline::{damped_cosine_fit, negentropy_extract, Contrast, DampedFit, NegentropyConfig};
pub use becsim::{
    generate_movie, render_frame, sample_detectors, solve_chemical_potential, DensityMovie, ModeSpec, NoiseSpec,
    ShapeUnits, SpatialGrid, TrapParams,
};
pub use error::{Error, Result};
pub use modefit::{fit_amplitudes, mode_symmetry_score, ModeKind, ModeMap};
pub use sica::{
    estimate_frequency, extract_component, loss_gradient_hessian, reference_cgf, sica_extract, sica_loss,
    ComponentResult, SicaConfig, UnmixingSolution, ZGrid,
};
pub use signal::{empirical_cgf, project, whiten, CgfEstimate, Ensemble, TimeGrid, WhitenedEnsemble};
