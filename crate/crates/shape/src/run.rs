//! The `score` pipeline shared by the binary and the tests.

use std::path::Path;

use shape_core::masking::apply_mask;
use shape_core::score::{score_dataset, StageError};
use shape_core::toybench::ToyModel;
use shape_core::{Dataset, Evaluator, Executor, ScoreReport, UtilityTable};

use crate::config::{file_sha256, EvaluatorSpec, RunConfig};
use crate::external::{ExternalError, ExternalEvaluator};
use crate::format::{read_dataset, FormatError};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("reading {what}: {source}")]
    Input { what: &'static str, source: FormatError },
    #[error("hashing {path}: {source}")]
    Digest { path: String, source: std::io::Error },
    #[error("invalid configuration: {0}")]
    Config(shape_core::Error),
    #[error("training: {0}")]
    Train(shape_core::Error),
    #[error(transparent)]
    External(#[from] ExternalError),
    #[error(transparent)]
    Stage(#[from] StageError),
}

impl RunError {
    /// Problems with the command line rather than with the run itself.
    pub fn is_usage(&self) -> bool {
        matches!(self, RunError::Config(_))
    }
}

pub struct RunOutput {
    pub report: ScoreReport,
    pub table: UtilityTable,
}

fn load(path: &Path, what: &'static str) -> Result<(Dataset, String), RunError> {
    let ds = read_dataset(path).map_err(|source| RunError::Input { what, source })?;
    let digest = file_sha256(path).map_err(|source| RunError::Digest {
        path: path.display().to_string(),
        source,
    })?;
    Ok((ds, digest))
}

/// Loads the inputs, scores them and stamps version, seed and config hash
/// into the report. A report with `partial` set is still returned.
pub fn run_score(config: &RunConfig, executor: &impl Executor) -> Result<RunOutput, RunError> {
    let (dataset, dataset_sha) = load(&config.dataset, "dataset")?;
    let score_config = config.score_config(dataset.schema()).map_err(RunError::Config)?;
    let mut train_sha = None;

    let evaluator: Box<dyn Evaluator> = match &config.evaluator {
        EvaluatorSpec::Toy { model } => {
            let model = match &config.train {
                Some(path) => {
                    let (train, sha) = load(path, "training data")?;
                    train_sha = Some(sha);
                    ToyModel::fit(*model, &train)
                }
                None => ToyModel::fit(*model, &dataset),
            }
            .map_err(RunError::Train)?;
            Box::new(model)
        }
        EvaluatorSpec::External { command } => Box::new(ExternalEvaluator::spawn(command, &dataset, config.timeout)?),
    };
    let evaluator = evaluator.as_ref();

    let out = score_dataset(&dataset, evaluator, &score_config, executor)?;
    let mut report = out.report;

    if evaluator.is_serial() {
        // identical repeat of the full-coalition request; the cache flags a changed answer
        let full = dataset.schema().full_mask();
        let recheck = full
            .key(dataset.schema())
            .and_then(|key| Ok((key, apply_mask(&dataset, full, &score_config.policy)?)))
            .map_err(|e| e.to_string())
            .and_then(|(key, masked)| evaluator.predict(&key, &masked));
        if let Err(e) = recheck {
            report.errors.push(format!("purity check: {e}"));
            report.partial = true;
        }
    }
    let warnings = evaluator.diagnostics();
    if !warnings.is_empty() {
        report.metadata.insert("evaluator_warnings".into(), warnings.join("; "));
    }

    report.tool_version = crate::TOOL_VERSION.into();
    report.config_hash = config.hash(&dataset_sha, train_sha.as_deref());
    report
        .metadata
        .insert("normalize_cooperation".into(), config.normalize_cooperation.to_string());
    report.metadata.insert("cap".into(), config.cap.to_string());
    Ok(RunOutput {
        report,
        table: out.table,
    })
}
