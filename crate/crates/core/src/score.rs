//! End-to-end scoring of one dataset and evaluator.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::data::{coalition_key, CoalitionMask, Dataset, ModalitySchema, PredictionTable};
use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::masking::{BaselinePolicy, PermutationPlan};
use crate::perceptual::perceptual_suite;
use crate::report::{CooperationEntry, PerceptualCell, ScoreReport};
use crate::shapley::{cooperation, shape_marginal, shapley_values, Game};
use crate::utility::{build_utility_table, Evaluator, UtilityTable, DEFAULT_COALITION_CAP};

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreConfig {
    pub seed: u64,
    pub repeats: usize,
    pub cap: usize,
    pub policy: BaselinePolicy,
    /// `None` selects every pair plus the full set.
    pub cooperation_sets: Option<Vec<CoalitionMask>>,
}

impl Default for ScoreConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            repeats: PermutationPlan::DEFAULT_REPEATS,
            cap: DEFAULT_COALITION_CAP,
            policy: BaselinePolicy::default(),
            cooperation_sets: None,
        }
    }
}

/// Every pair of modalities followed by the full set (once, if it is a pair).
pub fn default_cooperation_sets(schema: &ModalitySchema) -> Vec<CoalitionMask> {
    let n = schema.len();
    let mut sets = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            sets.push(CoalitionMask::from_indices([i, j]));
        }
    }
    let full = schema.full_mask();
    if n >= 2 && !sets.contains(&full) {
        sets.push(full);
    }
    sets
}

/// Failure that prevents any report from being produced.
#[derive(Debug, Clone, PartialEq)]
pub struct StageError {
    pub stage: &'static str,
    pub error: Error,
}

impl fmt::Display for StageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} stage failed: {}", self.stage, self.error)
    }
}

impl core::error::Error for StageError {}

pub struct ScoreOutput {
    pub report: ScoreReport,
    pub table: UtilityTable,
    pub predictions: PredictionTable,
}

/// Builds the utility table, marginal and cooperation scores and the full
/// perceptual suite. Failures after the utility table is built are recorded
/// in the report, which is then marked partial.
pub fn score_dataset<X: Executor>(
    dataset: &Dataset,
    evaluator: &(impl Evaluator + ?Sized),
    config: &ScoreConfig,
    executor: &X,
) -> core::result::Result<ScoreOutput, StageError> {
    let schema = dataset.schema();
    let stage = |stage: &'static str| move |error: Error| StageError { stage, error };
    if schema.len() < 2 {
        return Err(stage("validate")(Error::TooFewModalities(schema.len())));
    }
    let (table, predictions) =
        build_utility_table(dataset, evaluator, &config.policy, config.cap, executor).map_err(stage("utility"))?;

    let mut report = ScoreReport {
        dataset_id: dataset.id().into(),
        model: evaluator.describe(),
        seed: config.seed,
        modalities: schema.ids().map(String::from).collect(),
        accuracy_full: table.z_f(),
        empty_utility: table.empty_value(),
        utilities: table.entries().collect(),
        ..Default::default()
    };
    report
        .metadata
        .insert("baseline_fill".into(), format!("{}", config.policy.fill_value()));
    report
        .metadata
        .insert("empty_coalition".into(), "majority-classifier".into());
    report.metadata.insert(
        "perceptual_dispersion".into(),
        "population std over permutation redraws".into(),
    );
    report.metadata.insert("repeats".into(), config.repeats.to_string());

    if let Err(e) = fill_shapley(&mut report, &table) {
        report.errors.push(format!("shapley: {e}"));
    }
    let sets = config
        .cooperation_sets
        .clone()
        .unwrap_or_else(|| default_cooperation_sets(schema));
    for set in sets {
        let outcome = coalition_key(set, schema).and_then(|key| Ok((key, cooperation(&table, set)?)));
        match outcome {
            Ok((key, c)) => {
                report.cooperation.insert(
                    key,
                    CooperationEntry {
                        raw: c.raw,
                        points: c.points,
                        normalized_points: c.normalized_points,
                    },
                );
            }
            Err(e) => report.errors.push(format!("cooperation {:#x}: {e}", set.0)),
        }
    }

    if table.z_f() > 0.0 {
        for cell in perceptual_suite(dataset, evaluator, config.repeats, config.seed, table.z_f(), executor) {
            match cell.result {
                Ok(r) => {
                    report.perceptual.entry(cell.modality).or_default().insert(
                        cell.mode.short_name().into(),
                        PerceptualCell {
                            mean: r.mean,
                            std: r.std,
                            repeats: r.repeats,
                            self_donation_warnings: r.self_donation_warnings,
                        },
                    );
                }
                Err(e) => report
                    .errors
                    .push(format!("perceptual {} {}: {e}", cell.modality, cell.mode)),
            }
        }
    } else {
        report.errors.push(format!("perceptual: {}", Error::ZeroAccuracy));
    }
    report.partial = !report.errors.is_empty();
    Ok(ScoreOutput {
        report,
        table,
        predictions,
    })
}

fn fill_shapley(report: &mut ScoreReport, table: &UtilityTable) -> Result<()> {
    let result = shapley_values(&Game::from_table(table))?;
    for (id, phi) in result.players.iter().zip(&result.phi) {
        report.shapley.insert(id.clone(), *phi);
    }
    for id in table.schema().ids() {
        report.shape_marginal.insert(id.into(), shape_marginal(table, id)?);
    }
    Ok(())
}
