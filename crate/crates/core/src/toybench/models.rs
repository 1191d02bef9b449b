use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, ModalitySchema, Sample};
use crate::error::{Error, Result};
use crate::utility::{majority_classifier, Evaluator};

/// Gradient steps for the linear models.
pub const EPOCHS: usize = 300;
/// Step size for the linear models.
pub const LEARNING_RATE: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ToyModelKind {
    /// Always predicts the training majority class.
    Majority,
    /// Nearest class centroid over all modalities concatenated.
    NearestCentroid,
    /// Softmax regression on per-modality linear terms only.
    AdditiveLinear,
    /// Softmax regression with cross-modality feature products added.
    Interaction,
}

impl ToyModelKind {
    pub const ALL: [ToyModelKind; 4] = [
        Self::Majority,
        Self::NearestCentroid,
        Self::AdditiveLinear,
        Self::Interaction,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Majority => "majority",
            Self::NearestCentroid => "nearest-centroid",
            Self::AdditiveLinear => "additive-linear",
            Self::Interaction => "interaction",
        }
    }
}

impl fmt::Display for ToyModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ToyModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidSpec(format!("unknown model {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Params {
    Constant(usize),
    Centroids(Vec<Option<Vec<f64>>>),
    Softmax {
        /// Per-feature divisor applied before the linear map.
        scale: Vec<f64>,
        weights: Vec<Vec<f64>>,
        bias: Vec<f64>,
    },
}

/// A trained toy classifier. Prediction is a pure function of the features.
#[derive(Debug, Clone, PartialEq)]
pub struct ToyModel {
    kind: ToyModelKind,
    schema: ModalitySchema,
    params: Params,
}

fn concatenated(s: &Sample) -> impl Iterator<Item = f64> + '_ {
    s.features.iter().flatten().copied()
}

/// Linear terms of every modality followed by products across each pair of modalities.
fn design_row(s: &Sample, interaction: bool) -> Vec<f64> {
    let mut row: Vec<f64> = concatenated(s).collect();
    if interaction {
        for (m, a) in s.features.iter().enumerate() {
            for b in &s.features[m + 1..] {
                for x in a {
                    row.extend(b.iter().map(|y| x * y));
                }
            }
        }
    }
    row
}

fn argmax_lowest(scores: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (c, s) in scores.enumerate() {
        if s > best.1 {
            best = (c, s);
        }
    }
    best.0
}

impl ToyModel {
    /// Trains on `train`. Deterministic: no randomness is involved.
    pub fn fit(kind: ToyModelKind, train: &Dataset) -> Result<Self> {
        let k = train.schema().num_classes();
        let params = match kind {
            ToyModelKind::Majority => Params::Constant(majority_classifier(&train.labels())?.0),
            ToyModelKind::NearestCentroid => {
                let dim: usize = train.schema().modalities().iter().map(|m| m.dim).sum();
                let mut sums = vec![vec![0.0; dim]; k];
                let mut counts = vec![0usize; k];
                for s in train.samples() {
                    counts[s.label] += 1;
                    for (acc, x) in sums[s.label].iter_mut().zip(concatenated(s)) {
                        *acc += x;
                    }
                }
                Params::Centroids(
                    sums.into_iter()
                        .zip(counts)
                        .map(|(sum, n)| (n > 0).then(|| sum.into_iter().map(|x| x / n as f64).collect()))
                        .collect(),
                )
            }
            ToyModelKind::AdditiveLinear | ToyModelKind::Interaction => {
                fit_softmax(train, kind == ToyModelKind::Interaction)
            }
        };
        Ok(Self {
            kind,
            schema: train.schema().clone(),
            params,
        })
    }

    pub fn kind(&self) -> ToyModelKind {
        self.kind
    }

    pub fn schema(&self) -> &ModalitySchema {
        &self.schema
    }

    pub fn predict(&self, data: &Dataset) -> Result<Vec<usize>> {
        if data.schema() != &self.schema {
            return Err(Error::SchemaMismatch(format!(
                "model trained on a different schema than dataset {:?}",
                data.id()
            )));
        }
        Ok(data.samples().iter().map(|s| self.predict_one(s)).collect())
    }

    fn predict_one(&self, s: &Sample) -> usize {
        match &self.params {
            Params::Constant(c) => *c,
            Params::Centroids(centroids) => argmax_lowest(centroids.iter().map(|c| match c {
                Some(c) => -concatenated(s).zip(c).map(|(x, m)| (x - m) * (x - m)).sum::<f64>(),
                None => f64::NEG_INFINITY,
            })),
            Params::Softmax { scale, weights, bias } => {
                let row: Vec<f64> = design_row(s, self.kind == ToyModelKind::Interaction)
                    .into_iter()
                    .zip(scale)
                    .map(|(x, d)| x / d)
                    .collect();
                argmax_lowest(
                    weights
                        .iter()
                        .zip(bias)
                        .map(|(w, b)| b + w.iter().zip(&row).map(|(w, x)| w * x).sum::<f64>()),
                )
            }
        }
    }
}

/// Full-batch gradient descent on the softmax cross-entropy, from zero weights.
fn fit_softmax(train: &Dataset, interaction: bool) -> Params {
    let k = train.schema().num_classes();
    let rows: Vec<Vec<f64>> = train.samples().iter().map(|s| design_row(s, interaction)).collect();
    let d = rows[0].len();
    let n = rows.len() as f64;
    // root-mean-square scaling, no centering, so an all-zero block stays zero
    let scale: Vec<f64> = (0..d)
        .map(|j| {
            let rms = libm::sqrt(rows.iter().map(|r| r[j] * r[j]).sum::<f64>() / n);
            if rms > 1e-12 {
                rms
            } else {
                1.0
            }
        })
        .collect();
    let rows: Vec<Vec<f64>> = rows
        .into_iter()
        .map(|r| r.into_iter().zip(&scale).map(|(x, s)| x / s).collect())
        .collect();
    let labels = train.labels();
    let mut weights = vec![vec![0.0; d]; k];
    let mut bias = vec![0.0; k];
    let mut probs = vec![0.0; k];
    for _ in 0..EPOCHS {
        let mut grad_w = vec![vec![0.0; d]; k];
        let mut grad_b = vec![0.0; k];
        for (row, &y) in rows.iter().zip(&labels) {
            for c in 0..k {
                probs[c] = bias[c] + weights[c].iter().zip(row).map(|(w, x)| w * x).sum::<f64>();
            }
            let max = probs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mut z = 0.0;
            for p in probs.iter_mut() {
                *p = libm::exp(*p - max);
                z += *p;
            }
            for c in 0..k {
                let err = probs[c] / z - if c == y { 1.0 } else { 0.0 };
                grad_b[c] += err;
                for (g, x) in grad_w[c].iter_mut().zip(row) {
                    *g += err * x;
                }
            }
        }
        for c in 0..k {
            bias[c] -= LEARNING_RATE * grad_b[c] / n;
            for (w, g) in weights[c].iter_mut().zip(&grad_w[c]) {
                *w -= LEARNING_RATE * g / n;
            }
        }
    }
    Params::Softmax { scale, weights, bias }
}

/// Trains on `train` and predicts `eval`.
pub fn fit_predict(kind: ToyModelKind, train: &Dataset, eval: &Dataset) -> Result<Vec<usize>> {
    if train.schema() != eval.schema() {
        return Err(Error::SchemaMismatch("train and eval schemas differ".into()));
    }
    ToyModel::fit(kind, train)?.predict(eval)
}

impl Evaluator for ToyModel {
    fn predict(&self, _coalition: &str, dataset: &Dataset) -> core::result::Result<Vec<usize>, String> {
        ToyModel::predict(self, dataset).map_err(|e| e.to_string())
    }

    fn describe(&self) -> String {
        self.kind.name().into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::CoalitionMask;
    use crate::masking::{apply_mask, BaselinePolicy};
    use crate::toybench::{generate, Regime, RegimeSpec};
    use crate::utility::accuracy;

    fn acc(model: &ToyModel, ds: &Dataset) -> f64 {
        accuracy(&model.predict(ds).unwrap(), &ds.labels()).unwrap()
    }

    #[test]
    fn majority_predicts_constant() {
        let ds = generate(&RegimeSpec {
            class_balance: vec![0.3, 0.7],
            ..RegimeSpec::new(Regime::DominantRedundant, 100, 2)
        })
        .unwrap();
        let p = fit_predict(ToyModelKind::Majority, &ds, &ds).unwrap();
        assert!(p.iter().all(|&c| c == 1));
    }

    #[test]
    fn centroid_separates_noiseless_dominant() {
        let ds = generate(&RegimeSpec {
            noise: 0.0,
            ..RegimeSpec::new(Regime::DominantRedundant, 300, 5)
        })
        .unwrap();
        let t_only = apply_mask(&ds, CoalitionMask(0b10), &BaselinePolicy::default()).unwrap();
        let model = ToyModel::fit(ToyModelKind::NearestCentroid, &t_only).unwrap();
        assert_eq!(acc(&model, &t_only), 1.0);
    }

    #[test]
    fn additive_linear_cannot_solve_xor() {
        let ds = generate(&RegimeSpec::new(Regime::IndispensableXor, 600, 3)).unwrap();
        let model = ToyModel::fit(ToyModelKind::AdditiveLinear, &ds).unwrap();
        let a = acc(&model, &ds);
        assert!((a - 0.5).abs() < 0.1, "{a}");
    }

    #[test]
    fn interaction_solves_noiseless_xor_only_jointly() {
        let ds = generate(&RegimeSpec {
            noise: 0.0,
            ..RegimeSpec::new(Regime::IndispensableXor, 600, 3)
        })
        .unwrap();
        let model = ToyModel::fit(ToyModelKind::Interaction, &ds).unwrap();
        assert!(acc(&model, &ds) >= 0.95);
        for mask in [0b01, 0b10] {
            let masked = apply_mask(&ds, CoalitionMask(mask), &BaselinePolicy::default()).unwrap();
            let a = acc(&model, &masked);
            assert!((a - 0.5).abs() < 0.1, "mask {mask:b}: {a}");
        }
    }

    #[test]
    fn schema_mismatch() {
        let a = generate(&RegimeSpec::new(Regime::DominantRedundant, 20, 1)).unwrap();
        let b = generate(&RegimeSpec::new(Regime::IndispensableXor, 20, 1)).unwrap();
        assert!(matches!(
            fit_predict(ToyModelKind::Majority, &a, &b),
            Err(Error::SchemaMismatch(_))
        ));
    }

    #[test]
    fn names_roundtrip() {
        for k in ToyModelKind::ALL {
            assert_eq!(k.name().parse::<ToyModelKind>().unwrap(), k);
        }
    }
}
