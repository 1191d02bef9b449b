//! Wire messages exchanged with an external evaluator, one JSON object per line.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use shape_core::{Dataset, Modality};

pub const PROTOCOL_VERSION: u32 = 1;

/// Feature blocks of one sample, keyed by modality id. No label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireSample {
    pub features: BTreeMap<String, Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Request {
    Hello {
        version: u32,
        schema: Vec<Modality>,
        num_classes: usize,
    },
    Predict {
        request_id: u64,
        coalition: String,
        samples: Vec<WireSample>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Response {
    Ready,
    Predictions {
        request_id: u64,
        labels: Vec<serde_json::Value>,
    },
    Error {
        #[serde(default)]
        request_id: Option<u64>,
        message: String,
    },
}

pub fn hello(dataset: &Dataset) -> Request {
    Request::Hello {
        version: PROTOCOL_VERSION,
        schema: dataset.schema().modalities().to_vec(),
        num_classes: dataset.schema().num_classes(),
    }
}

/// Builds a predict request carrying features only.
pub fn predict_request(request_id: u64, coalition: &str, dataset: &Dataset) -> Request {
    let ids: Vec<&str> = dataset.schema().ids().collect();
    let samples = dataset
        .samples()
        .iter()
        .map(|s| WireSample {
            features: ids
                .iter()
                .map(|id| id.to_string())
                .zip(s.features.iter().cloned())
                .collect(),
        })
        .collect();
    Request::Predict {
        request_id,
        coalition: coalition.into(),
        samples,
    }
}

/// Checks that every label is a non-negative integer and that there is one per sample.
pub fn decode_labels(labels: &[serde_json::Value], expected: usize) -> Result<Vec<usize>, String> {
    if labels.len() != expected {
        return Err(format!(
            "protocol violation: {} predictions for {expected} samples",
            labels.len()
        ));
    }
    labels
        .iter()
        .enumerate()
        .map(|(i, v)| {
            v.as_u64()
                .and_then(|x| usize::try_from(x).ok())
                .ok_or_else(|| format!("non-numeric prediction {v} at sample {i}"))
        })
        .collect()
}
