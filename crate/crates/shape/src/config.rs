//! Run configuration and its reproducibility hash.

use std::fs::File;
use std::io::{self, Read};
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Serialize;
use sha2::{Digest, Sha256};
use shape_core::data::parse_coalition_key;
use shape_core::score::ScoreConfig;
use shape_core::toybench::ToyModelKind;
use shape_core::{BaselinePolicy, ModalitySchema};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EvaluatorSpec {
    Toy { model: ToyModelKind },
    External { command: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub dataset: PathBuf,
    /// Training data for toy models; the scored dataset when absent.
    pub train: Option<PathBuf>,
    pub evaluator: EvaluatorSpec,
    pub seed: u64,
    pub repeats: usize,
    pub cap: usize,
    pub fill: f64,
    /// Coalition keys such as `V+T`; `None` means every pair plus the full set.
    pub cooperation: Option<Vec<String>>,
    pub normalize_cooperation: bool,
    pub timeout: Duration,
    pub out_json: Option<PathBuf>,
    pub out_csv: Option<PathBuf>,
}

/// Everything that can change the numbers, with file paths replaced by content digests.
#[derive(Serialize)]
struct Hashed<'a> {
    tool: &'a str,
    dataset_sha256: &'a str,
    train_sha256: Option<&'a str>,
    evaluator: &'a EvaluatorSpec,
    seed: u64,
    repeats: usize,
    cap: usize,
    fill: f64,
    cooperation: &'a Option<Vec<String>>,
    normalize_cooperation: bool,
}

impl RunConfig {
    pub fn score_config(&self, schema: &ModalitySchema) -> shape_core::Result<ScoreConfig> {
        let cooperation_sets = match &self.cooperation {
            None => None,
            Some(keys) => Some(
                keys.iter()
                    .map(|k| parse_coalition_key(k, schema))
                    .collect::<shape_core::Result<Vec<_>>>()?,
            ),
        };
        Ok(ScoreConfig {
            seed: self.seed,
            repeats: self.repeats,
            cap: self.cap,
            policy: BaselinePolicy::new(self.fill)?,
            cooperation_sets,
        })
    }

    /// Hex SHA-256 over the result-relevant settings and input contents.
    pub fn hash(&self, dataset_sha256: &str, train_sha256: Option<&str>) -> String {
        let hashed = Hashed {
            tool: crate::TOOL_VERSION,
            dataset_sha256,
            train_sha256,
            evaluator: &self.evaluator,
            seed: self.seed,
            repeats: self.repeats,
            cap: self.cap,
            fill: self.fill,
            cooperation: &self.cooperation,
            normalize_cooperation: self.normalize_cooperation,
        };
        let bytes = serde_json::to_vec(&hashed).expect("plain data serializes");
        hex::encode(Sha256::digest(bytes))
    }
}

pub fn file_sha256(path: &Path) -> io::Result<String> {
    let mut file = File::open(path)?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 1 << 16];
    loop {
        let n = file.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}
