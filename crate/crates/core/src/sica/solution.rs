use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::baseline::NegentropyConfig;
use crate::sica::SicaConfig;
use crate::signal::{window_moments, WhitenedEnsemble};

/// One outer iteration of a component's refinement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub window_start: usize,
    pub window_len: usize,
    pub dt: f64,
    pub frequency: f64,
    pub phase: f64,
    pub loss: f64,
    /// Unit direction in the frame whitened over this round's window.
    pub direction: Vec<f64>,
    /// Raw-space unmixing row: the signal is `raw_row · (x − window mean)`.
    pub raw_row: Vec<f64>,
    #[serde(skip)]
    pub signal: Vec<f64>,
}

impl RoundRecord {
    pub fn window(&self) -> Range<usize> {
        self.window_start..self.window_start + self.window_len
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "state", content = "reason")]
pub enum ComponentStatus {
    /// Frequency change fell below the tolerance.
    Converged,
    /// Outer iteration limit reached first.
    IterationLimit,
    /// A later round failed; the last good round is reported.
    Interrupted(String),
}

/// One extracted component with its refinement history.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentResult {
    pub direction: Vec<f64>,
    pub signal: Vec<f64>,
    pub frequency: f64,
    pub phase: f64,
    pub loss: f64,
    pub frequency_history: Vec<f64>,
    pub window: Range<usize>,
    pub raw_row: Vec<f64>,
    /// Position in the deflation sequence.
    pub extraction_index: usize,
    pub status: ComponentStatus,
    pub rounds: Vec<RoundRecord>,
    /// Contrast value for negentropy extraction.
    pub negentropy: Option<f64>,
}

impl ComponentResult {
    /// Round `k` (1-based), if it ran.
    pub fn round(&self, k: usize) -> Option<&RoundRecord> {
        k.checked_sub(1).and_then(|i| self.rounds.get(i))
    }
}

/// A component whose extraction produced no usable round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentFailure {
    pub extraction_index: usize,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "method", content = "config")]
pub enum MethodConfig {
    Sica(SicaConfig),
    Negentropy(NegentropyConfig),
}

/// Result of a full extraction run.
#[derive(Debug, Clone, PartialEq)]
pub struct UnmixingSolution {
    /// Sorted by ascending frequency.
    pub components: Vec<ComponentResult>,
    pub failures: Vec<ComponentFailure>,
    /// Whitening over the first (full-record or caller-given) window.
    pub whitening_used: WhitenedEnsemble,
    pub config: MethodConfig,
}

impl UnmixingSolution {
    pub fn frequencies(&self) -> Vec<f64> {
        self.components.iter().map(|c| c.frequency).collect()
    }

    /// Largest |dᵢ·dⱼ| over pairs of final directions. Meaningful as an
    /// orthogonality check when all components share one whitening window.
    pub fn max_direction_overlap(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, a) in self.components.iter().enumerate() {
            for b in &self.components[i + 1..] {
                let dot: f64 = a.direction.iter().zip(&b.direction).map(|(x, y)| x * y).sum();
                worst = worst.max(dot.abs());
            }
        }
        worst
    }

    /// Deflation constraint residual: for each component j and every component i
    /// extracted before it, |corr(sᵢ, sⱼ)| over j's final window. In j's whitened
    /// frame this is |dⱼ · Σ^{1/2}uᵢ| / |Σ^{1/2}uᵢ|, so it reduces to
    /// [`max_direction_overlap`](Self::max_direction_overlap) when windows coincide.
    pub fn orthogonality_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for b in &self.components {
            for a in self.components.iter().filter(|a| a.extraction_index < b.extraction_index) {
                let (_, cov) = window_moments(&[a.signal.clone(), b.signal.clone()], &b.window);
                let corr = cov[(0, 1)] / (cov[(0, 0)] * cov[(1, 1)]).sqrt();
                worst = worst.max(corr.abs());
            }
        }
        worst
    }
}
