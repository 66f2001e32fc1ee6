use std::f64::consts::TAU;
use std::ops::Range;

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::sica::loss::{reference_values, WindowData};
use crate::sica::newton::{complement_basis, newton_sphere, NewtonOutcome};
use crate::sica::solution::{
    ComponentFailure, ComponentResult, ComponentStatus, MethodConfig, RoundRecord, UnmixingSolution,
};
use crate::sica::{fit_cosine, sica_loss, SicaConfig};
use crate::signal::{project, whiten, Ensemble, WhitenedEnsemble};

/// Best direction found by [`extract_component`].
#[derive(Debug, Clone, PartialEq)]
pub struct ExtractedComponent {
    /// Unit vector in the whitened frame.
    pub direction: Vec<f64>,
    /// Projection over the whole record.
    pub signal: Vec<f64>,
    /// Loss over the statistics window.
    pub loss: f64,
    pub window: Range<usize>,
}

/// Rng for restart `restart` of component `component`.
pub(crate) fn restart_rng(seed: u64, component: usize, restart: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((component as u64) << 32) | restart as u64);
    rng
}

pub(crate) fn normalized(v: &[f64]) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / n).collect()
}

/// Minimises the cumulant-matching loss over unit directions orthogonal to
/// `orthogonal_to`, keeping the lowest-loss of `config.restarts` seeded starts.
pub fn extract_component(
    whitened: &WhitenedEnsemble,
    window: Range<usize>,
    config: &SicaConfig,
    orthogonal_to: &[Vec<f64>],
) -> Result<ExtractedComponent> {
    let (best, converged) = extract_with(whitened, window, config, orthogonal_to, None, 0)?;
    if converged {
        Ok(best.0)
    } else {
        Err(Error::NoConvergence { grad_norm: best.1 })
    }
}

type Extraction = ((ExtractedComponent, f64), bool);

pub(crate) fn extract_with(
    whitened: &WhitenedEnsemble,
    window: Range<usize>,
    config: &SicaConfig,
    orthogonal_to: &[Vec<f64>],
    warm_start: Option<&[f64]>,
    component: usize,
) -> Result<Extraction> {
    config.validate()?;
    let m = whitened.n_channels();
    whitened.grid().check_window(&window)?;
    if orthogonal_to.len() >= m {
        return Err(Error::param(format!(
            "{} constraint directions leave no freedom in {m} dimensions",
            orthogonal_to.len()
        )));
    }
    for v in orthogonal_to {
        if v.len() != m {
            return Err(Error::DimensionMismatch { expected: m, got: v.len() });
        }
    }
    let constraints: Vec<DVector<f64>> = orthogonal_to.iter().map(|v| DVector::from_column_slice(v)).collect();
    let basis = complement_basis(m, &constraints);
    if basis.ncols() == 0 {
        return Err(Error::param("constraint directions span the whole space"));
    }
    let data = WindowData::new(whitened, window.clone());
    let k_ref = reference_values(&config.z_grid);

    let mut starts: Vec<DVector<f64>> = (0..config.restarts)
        .map(|r| {
            let mut rng = restart_rng(config.rng_seed, component, r);
            let v = DVector::from_iterator(m, (0..m).map(|_| StandardNormal.sample(&mut rng)));
            basis.transpose() * v
        })
        .collect();
    if let Some(w) = warm_start {
        // both orientations: the sign convention may have flipped the previous optimum
        let c = basis.transpose() * DVector::from_column_slice(w);
        if c.norm() > 1e-8 {
            starts.insert(0, -&c);
            starts.insert(0, c);
        }
    }
    let outcomes: Vec<NewtonOutcome> = starts
        .par_iter()
        .map(|c0| {
            let c0 = if c0.norm() > 0.0 { c0.clone() } else { DVector::from_element(c0.len(), 1.0) };
            newton_sphere(&data, &config.z_grid, &k_ref, &basis, &c0, config.newton_max_steps, config.newton_grad_tol)
        })
        .collect();
    let any_converged = outcomes.iter().any(|o| o.converged);
    let best = outcomes
        .into_iter()
        .enumerate()
        .min_by(|(i, a), (j, b)| a.loss.total_cmp(&b.loss).then(i.cmp(j)))
        .map(|(_, o)| o)
        .expect("at least one start");

    let mut direction = normalized(&best.w);
    let mut signal = project(whitened, &direction)?;
    let mut loss = best.loss;
    if signal[0] < 0.0 {
        direction.iter_mut().for_each(|d| *d = -*d);
        signal.iter_mut().for_each(|s| *s = -*s);
        loss = sica_loss(&signal, window.clone(), &config.z_grid)?;
    }
    Ok(((ExtractedComponent { direction, signal, loss, window }, best.grad_norm), any_converged))
}

/// Smallest statistics window used during refinement.
pub(crate) fn min_window(m: usize) -> usize {
    (m + 2).max(8)
}

/// Deflation extraction with per-component integer-period window refinement.
pub fn sica_extract(raw: &Ensemble, n_components: usize, config: &SicaConfig) -> Result<UnmixingSolution> {
    config.validate()?;
    let m = raw.n_channels();
    if n_components == 0 || n_components > m {
        return Err(Error::param(format!("n_components must be in 1..={m}, got {n_components}")));
    }
    let grid = *raw.grid();
    let full = grid.full();
    let whitening_used = whiten(raw, full.clone())?;

    let mut components = Vec::new();
    let mut failures = Vec::new();
    let mut previous_rows: Vec<Vec<f64>> = Vec::new();

    for c in 0..n_components {
        let mut window = full.clone();
        let mut rounds: Vec<RoundRecord> = Vec::new();
        let mut last_row: Option<Vec<f64>> = None;
        let mut status =
            if config.max_outer_iterations > 1 { ComponentStatus::IterationLimit } else { ComponentStatus::Converged };
        let mut error: Option<String> = None;

        for _ in 0..config.max_outer_iterations {
            let step = (|| -> Result<RoundRecord> {
                let wh = if window == full { whitening_used.clone() } else { whiten(raw, window.clone())? };
                let constraints: Vec<Vec<f64>> =
                    previous_rows.iter().map(|u| normalized(&wh.frame_direction(u))).collect();
                let warm = last_row.as_ref().map(|u| normalized(&wh.frame_direction(u)));
                let ((ext, grad_norm), converged) =
                    extract_with(&wh, window.clone(), config, &constraints, warm.as_deref(), c)?;
                if !converged {
                    last_row = Some(wh.raw_row(&ext.direction));
                    return Err(Error::NoConvergence { grad_norm });
                }
                let fit = fit_cosine(&ext.signal, &grid)?;
                Ok(RoundRecord {
                    window_start: window.start,
                    window_len: window.len(),
                    dt: grid.dt(),
                    frequency: fit.omega,
                    phase: fit.phase,
                    loss: ext.loss,
                    raw_row: wh.raw_row(&ext.direction),
                    direction: ext.direction,
                    signal: ext.signal,
                })
            })();
            let record = match step {
                Ok(r) => r,
                Err(e) => {
                    error = Some(e.to_string());
                    break;
                }
            };
            let omega = record.frequency;
            let previous = rounds.last().map(|r| r.frequency);
            last_row = Some(record.raw_row.clone());
            rounds.push(record);
            if let Some(prev) = previous {
                if ((omega - prev) / prev).abs() < config.freq_rel_tol {
                    status = ComponentStatus::Converged;
                    break;
                }
            }
            window = grid.anchored_window(config.periods_per_window as f64 * TAU / omega, min_window(m));
        }

        if let Some(row) = &last_row {
            previous_rows.push(row.clone());
        }
        match (rounds.last(), error) {
            (None, err) => failures.push(ComponentFailure {
                extraction_index: c,
                error: err.unwrap_or_else(|| "no round completed".into()),
            }),
            (Some(last), err) => {
                if let Some(e) = err {
                    status = ComponentStatus::Interrupted(e);
                    // deflation must use the reported round
                    if let Some(row) = previous_rows.last_mut() {
                        *row = last.raw_row.clone();
                    }
                }
                components.push(ComponentResult {
                    direction: last.direction.clone(),
                    signal: last.signal.clone(),
                    frequency: last.frequency,
                    phase: last.phase,
                    loss: last.loss,
                    frequency_history: rounds.iter().map(|r| r.frequency).collect(),
                    window: last.window(),
                    raw_row: last.raw_row.clone(),
                    extraction_index: c,
                    status,
                    rounds,
                    negentropy: None,
                });
            }
        }
    }
    components.sort_by(|a, b| a.frequency.total_cmp(&b.frequency).then(a.extraction_index.cmp(&b.extraction_index)));
    Ok(UnmixingSolution { components, failures, whitening_used, config: MethodConfig::Sica(config.clone()) })
}
