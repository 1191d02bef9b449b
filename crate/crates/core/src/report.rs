//! Structured score report.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CooperationEntry {
    /// Raw utility difference.
    pub raw: f64,
    /// `100 · raw`.
    pub points: f64,
    /// `100 · raw / Z_f`.
    pub normalized_points: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerceptualCell {
    pub mean: f64,
    pub std: f64,
    pub repeats: usize,
    pub self_donation_warnings: usize,
}

/// Everything one scoring run produces. Maps are keyed by modality id or
/// coalition key; `modalities` keeps the schema order.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ScoreReport {
    pub tool_version: String,
    pub dataset_id: String,
    pub model: String,
    pub seed: u64,
    pub config_hash: String,
    /// Set when a stage failed after the utility table was built.
    pub partial: bool,
    pub modalities: Vec<String>,
    /// Full-coalition accuracy, Z_f.
    pub accuracy_full: f64,
    /// Majority-class share, V(∅).
    pub empty_utility: f64,
    pub utilities: BTreeMap<String, f64>,
    /// Raw Shapley values (accuracy fractions).
    pub shapley: BTreeMap<String, f64>,
    /// Shapley value over Z_f, in percentage points.
    pub shape_marginal: BTreeMap<String, f64>,
    pub cooperation: BTreeMap<String, CooperationEntry>,
    /// modality → mode (`uniform`, `in`, `out`) → cell.
    pub perceptual: BTreeMap<String, BTreeMap<String, PerceptualCell>>,
    pub errors: Vec<String>,
    pub metadata: BTreeMap<String, String>,
}

impl ScoreReport {
    /// `Σ_i 𝒮_i · Z_f / 100 - (Z_f - V(∅))`; zero up to rounding.
    pub fn efficiency_gap(&self) -> f64 {
        let total: f64 = self
            .shape_marginal
            .values()
            .map(|s| s * self.accuracy_full / 100.0)
            .sum();
        total - (self.accuracy_full - self.empty_utility)
    }
}
