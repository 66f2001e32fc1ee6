//! Cumulant-matching component extraction with integer-period window refinement.

mod config;
mod extract;
mod frequency;
mod loss;
mod newton;
mod solution;

pub use config::{SicaConfig, ZGrid};
pub use extract::{extract_component, sica_extract, ExtractedComponent};
pub use frequency::{estimate_frequency, fit_cosine, wrap_phase, CosineFit, ZERO_PADDING};
pub use loss::{loss_gradient_hessian, max_cgf_deviation, reference_cgf, sica_loss};
pub use solution::{ComponentFailure, ComponentResult, ComponentStatus, MethodConfig, RoundRecord, UnmixingSolution};

pub(crate) use extract::{normalized, restart_rng};
