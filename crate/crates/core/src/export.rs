//! JSON and CSV export of extraction results.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::binio::{read_json, write_json};
use crate::error::{Error, Result};
use crate::sica::{ComponentFailure, ComponentStatus, MethodConfig, RoundRecord, UnmixingSolution};
use crate::signal::{write_series_csv, TimeGrid};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentDocument {
    pub extraction_index: usize,
    pub direction: Vec<f64>,
    pub raw_row: Vec<f64>,
    pub frequency: f64,
    pub phase: f64,
    pub loss: f64,
    pub frequency_history: Vec<f64>,
    pub status: ComponentStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub negentropy: Option<f64>,
    pub rounds: Vec<RoundRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WhiteningDocument {
    pub window_start: usize,
    pub window_len: usize,
    pub means: Vec<f64>,
    /// Row-major M×M.
    pub whitening_matrix: Vec<Vec<f64>>,
}

/// Serialisable form of an [`UnmixingSolution`] (signals go to CSV).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionDocument {
    pub config: MethodConfig,
    pub time_grid: TimeGrid,
    pub whitening: WhiteningDocument,
    pub components: Vec<ComponentDocument>,
    pub failures: Vec<ComponentFailure>,
}

impl SolutionDocument {
    pub fn from_solution(sol: &UnmixingSolution) -> Self {
        let wh = &sol.whitening_used;
        let w = wh.whitening_matrix();
        Self {
            config: sol.config.clone(),
            time_grid: *wh.grid(),
            whitening: WhiteningDocument {
                window_start: wh.window().start,
                window_len: wh.window().len(),
                means: wh.means().to_vec(),
                whitening_matrix: (0..w.nrows()).map(|i| w.row(i).iter().copied().collect()).collect(),
            },
            components: sol
                .components
                .iter()
                .map(|c| ComponentDocument {
                    extraction_index: c.extraction_index,
                    direction: c.direction.clone(),
                    raw_row: c.raw_row.clone(),
                    frequency: c.frequency,
                    phase: c.phase,
                    loss: c.loss,
                    frequency_history: c.frequency_history.clone(),
                    status: c.status.clone(),
                    negentropy: c.negentropy,
                    rounds: c.rounds.clone(),
                })
                .collect(),
            failures: sol.failures.clone(),
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_json(path, self)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        read_json(path)
    }

    pub fn frequencies(&self) -> Vec<f64> {
        self.components.iter().map(|c| c.frequency).collect()
    }
}

/// Final component signals as `t,s1,...,sN`.
pub fn write_components_csv(sol: &UnmixingSolution, path: impl AsRef<Path>) -> Result<()> {
    let columns: Vec<Vec<f64>> = sol.components.iter().map(|c| c.signal.clone()).collect();
    write_columns(sol.whitening_used.grid(), columns, path)
}

/// Round-`k` signals (1-based); components that stopped earlier contribute their last round.
pub fn write_round_csv(sol: &UnmixingSolution, k: usize, path: impl AsRef<Path>) -> Result<()> {
    let columns: Vec<Vec<f64>> = sol
        .components
        .iter()
        .map(|c| c.round(k).or(c.rounds.last()).map(|r| r.signal.clone()).unwrap_or_else(|| c.signal.clone()))
        .collect();
    write_columns(sol.whitening_used.grid(), columns, path)
}

fn write_columns(grid: &TimeGrid, columns: Vec<Vec<f64>>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let names: Vec<String> = (1..=columns.len()).map(|i| format!("s{i}")).collect();
    let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_series_csv(std::io::BufWriter::new(f), grid, &names, &columns)
}

/// Largest number of rounds any component ran.
pub fn max_rounds(sol: &UnmixingSolution) -> usize {
    sol.components.iter().map(|c| c.rounds.len()).max().unwrap_or(0)
}
