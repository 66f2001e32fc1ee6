//! Reference methods: fixed-point negentropy ICA and a damped-cosine fit.

mod damped;
mod negentropy;

pub use damped::{damped_cosine_fit, damped_cosine_fit_with, DampedFit, DampedFitOptions};
pub use negentropy::{negentropy_extract, Contrast, NegentropyConfig};
