//! Time-series containers, whitening and empirical cumulant-generating functions.

mod cgf;
mod ensemble;
mod grid;
mod whiten;

pub use cgf::{empirical_cgf, log_mean_exp, CgfEstimate};
pub use ensemble::{fmt_f64, read_series_csv, write_series_csv, Ensemble};
pub use grid::TimeGrid;
pub use whiten::{project, whiten, window_moments, WhitenedEnsemble, RANK_TOLERANCE};
