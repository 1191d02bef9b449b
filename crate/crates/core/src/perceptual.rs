//! Perceptual scores: normalized accuracy drop when a modality is replaced by
//! the features of a donor sample, with uniform, in-class and out-class donors.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::data::{coalition_key, CoalitionMask, Dataset};
use crate::error::{Error, Result};
use crate::exec::{Executor, Sequential};
use crate::masking::{permute_modalities, PermutationMode, PermutationPlan};
use crate::utility::{accuracy, evaluate, Evaluator};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerceptualResult {
    /// Coalition key of the permuted modalities.
    pub target: String,
    pub mode: PermutationMode,
    /// Mean score over repeats, in percentage points.
    pub mean: f64,
    /// Population standard deviation over repeats, in percentage points.
    pub std: f64,
    pub repeats: usize,
    /// Receivers per repeat that had to keep their own features (in-class only).
    pub self_donation_warnings: usize,
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, libm::sqrt(var))
}

/// Runs `plan.repeats` permutations of the target modalities and scores each
/// as `100 · (z_f - V_r) / z_f`, where `V_r` is the accuracy of the unmasked
/// model on the permuted data.
pub fn perceptual_score<X: Executor>(
    dataset: &Dataset,
    evaluator: &(impl Evaluator + ?Sized),
    plan: &PermutationPlan,
    z_f: f64,
    executor: &X,
) -> Result<PerceptualResult> {
    if z_f.is_nan() || z_f <= 0.0 {
        return Err(Error::ZeroAccuracy);
    }
    let schema = dataset.schema();
    let full = schema.full_mask();
    let target = coalition_key(plan.target, schema)?;
    if plan.target.is_empty() || plan.target == full {
        return Err(Error::InvalidPlan(alloc::format!(
            "target {target} must be a proper non-empty subset of the modalities"
        )));
    }
    if plan.repeats == 0 {
        return Err(Error::InvalidPlan("repeats must be at least 1".into()));
    }
    if plan.mode == PermutationMode::OutClass && dataset.class_counts().iter().filter(|&&c| c > 0).count() < 2 {
        return Err(Error::NoValidDonor {
            sample: 0,
            mode: "out-class",
        });
    }
    let full_key = coalition_key(full, schema)?;
    let labels = dataset.labels();
    let job = |r: usize| -> Result<(f64, usize)> {
        let permuted = permute_modalities(dataset, plan, r)?;
        let predictions = evaluate(evaluator, &full_key, &permuted.dataset)?;
        let v_r = accuracy(&predictions, &labels)?;
        Ok((100.0 * (z_f - v_r) / z_f, permuted.self_donations))
    };
    let runs = if evaluator.is_serial() {
        Sequential.map(plan.repeats, job)
    } else {
        executor.map(plan.repeats, job)
    };
    let runs = runs.into_iter().collect::<Result<Vec<_>>>()?;
    let scores: Vec<f64> = runs.iter().map(|r| r.0).collect();
    let (mean, std) = mean_std(&scores);
    Ok(PerceptualResult {
        target,
        mode: plan.mode,
        mean,
        std,
        repeats: plan.repeats,
        self_donation_warnings: runs[0].1,
    })
}

/// One cell of the perceptual suite. A failing cell does not stop the others.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteCell {
    pub modality: String,
    pub mode: PermutationMode,
    pub result: Result<PerceptualResult>,
}

/// Uniform, in-class and out-class scores for every single modality, in
/// schema order.
pub fn perceptual_suite<X: Executor>(
    dataset: &Dataset,
    evaluator: &(impl Evaluator + ?Sized),
    repeats: usize,
    seed: u64,
    z_f: f64,
    executor: &X,
) -> Vec<SuiteCell> {
    let schema = dataset.schema();
    let mut cells = Vec::with_capacity(3 * schema.len());
    for (i, m) in schema.modalities().iter().enumerate() {
        for mode in PermutationMode::ALL {
            let plan = PermutationPlan::new(CoalitionMask::singleton(i), mode, repeats, seed);
            cells.push(SuiteCell {
                modality: m.id.clone(),
                mode,
                result: perceptual_score(dataset, evaluator, &plan, z_f, executor),
            });
        }
    }
    cells
}
