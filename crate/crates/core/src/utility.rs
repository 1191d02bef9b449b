//! Coalition utility: accuracy of an evaluator on coalition-masked data.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::data::{coalition_key, CoalitionMask, Dataset, ModalitySchema, PredictionTable};
use crate::error::{Error, Result};
use crate::exec::{Executor, Sequential};
use crate::masking::{apply_mask, BaselinePolicy};

/// Default limit on the number of modalities for exhaustive enumeration.
pub const DEFAULT_COALITION_CAP: usize = 16;

/// Black-box classifier.
///
/// `predict` must be a pure function of the feature content of `dataset`: the
/// same input must always produce the same predictions. Labels are available
/// on the dataset but an evaluator must not read them.
pub trait Evaluator: Sync {
    /// One predicted class per sample, in sample order.
    fn predict(&self, coalition: &str, dataset: &Dataset) -> core::result::Result<Vec<usize>, String>;

    /// Serial evaluators get at most one request in flight.
    fn is_serial(&self) -> bool {
        false
    }

    /// Short name used in reports.
    fn describe(&self) -> String;

    /// Warnings gathered while serving requests (purity violations and the like).
    fn diagnostics(&self) -> Vec<String> {
        Vec::new()
    }
}

impl<E: Evaluator + ?Sized> Evaluator for &E {
    fn predict(&self, coalition: &str, dataset: &Dataset) -> core::result::Result<Vec<usize>, String> {
        (**self).predict(coalition, dataset)
    }
    fn is_serial(&self) -> bool {
        (**self).is_serial()
    }
    fn describe(&self) -> String {
        (**self).describe()
    }
    fn diagnostics(&self) -> Vec<String> {
        (**self).diagnostics()
    }
}

/// Calls the evaluator and checks arity and class range of the answer.
pub fn evaluate(evaluator: &(impl Evaluator + ?Sized), coalition: &str, dataset: &Dataset) -> Result<Vec<usize>> {
    let predictions = evaluator
        .predict(coalition, dataset)
        .map_err(|message| Error::Evaluator {
            coalition: coalition.into(),
            message,
        })?;
    if predictions.len() != dataset.len() {
        return Err(Error::Evaluator {
            coalition: coalition.into(),
            message: format!(
                "returned {} predictions for {} samples",
                predictions.len(),
                dataset.len()
            ),
        });
    }
    let k = dataset.schema().num_classes();
    if let Some(&value) = predictions.iter().find(|&&p| p >= k) {
        return Err(Error::PredictionOutOfRange {
            coalition: coalition.into(),
            value,
            num_classes: k,
        });
    }
    Ok(predictions)
}

/// Fraction of predictions equal to their label.
pub fn accuracy(predictions: &[usize], labels: &[usize]) -> Result<f64> {
    if predictions.len() != labels.len() {
        return Err(Error::LengthMismatch {
            predictions: predictions.len(),
            labels: labels.len(),
        });
    }
    if labels.is_empty() {
        return Err(Error::EmptyInput);
    }
    let hits = predictions.iter().zip(labels).filter(|(p, y)| p == y).count();
    Ok(hits as f64 / labels.len() as f64)
}

/// Most frequent class (ties go to the lowest index) and its share of `labels`.
pub fn majority_classifier(labels: &[usize]) -> Result<(usize, f64)> {
    let max = *labels.iter().max().ok_or(Error::EmptyInput)?;
    let mut counts = alloc::vec![0usize; max + 1];
    for &y in labels {
        counts[y] += 1;
    }
    let (class, count) = counts
        .iter()
        .enumerate()
        .fold((0, 0), |best, (c, &n)| if n > best.1 { (c, n) } else { best });
    Ok((class, count as f64 / labels.len() as f64))
}

/// Utility of every coalition, indexed by coalition bits.
#[derive(Debug, Clone, PartialEq)]
pub struct UtilityTable {
    schema: ModalitySchema,
    values: Vec<f64>,
}

impl UtilityTable {
    /// Builds a complete table from `2^n` values indexed by coalition bits.
    pub fn from_values(schema: ModalitySchema, values: Vec<f64>) -> Result<Self> {
        let n = schema.len();
        if n >= 31 || values.len() != 1usize << n {
            return Err(Error::IncompleteTable);
        }
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidGame(format!("utility {v} outside [0, 1]")));
        }
        Ok(Self { schema, values })
    }

    /// Builds a table from coalition keys. Every subset must be present exactly once.
    pub fn from_keyed<'a>(schema: ModalitySchema, entries: impl IntoIterator<Item = (&'a str, f64)>) -> Result<Self> {
        let n = schema.len();
        if n >= 31 {
            return Err(Error::IncompleteTable);
        }
        let mut values = alloc::vec![None; 1usize << n];
        for (key, v) in entries {
            let mask = crate::data::parse_coalition_key(key, &schema)?;
            if values[mask.0 as usize].replace(v).is_some() {
                return Err(Error::InvalidGame(format!("duplicate coalition {key:?}")));
            }
        }
        let values = values
            .into_iter()
            .collect::<Option<Vec<_>>>()
            .ok_or(Error::IncompleteTable)?;
        Self::from_values(schema, values)
    }

    pub fn schema(&self) -> &ModalitySchema {
        &self.schema
    }

    pub fn n(&self) -> usize {
        self.schema.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, mask: CoalitionMask) -> f64 {
        self.values[mask.0 as usize]
    }

    /// Full-coalition utility, the normalizer Z_f.
    pub fn z_f(&self) -> f64 {
        self.get(self.schema.full_mask())
    }

    pub fn empty_value(&self) -> f64 {
        self.values[0]
    }

    /// `(key, utility)` pairs in coalition-bit order.
    pub fn entries(&self) -> impl Iterator<Item = (String, f64)> + '_ {
        self.values.iter().enumerate().map(|(bits, &v)| {
            let key = coalition_key(CoalitionMask(bits as u64), &self.schema).expect("in-range mask");
            (key, v)
        })
    }
}

/// Evaluates every coalition of the dataset's modalities.
///
/// Non-empty coalitions are zero-filled by `policy` and scored by `evaluator`
/// (exactly `2^n - 1` calls). The empty coalition takes the majority-class
/// share without calling the evaluator.
pub fn build_utility_table<X: Executor>(
    dataset: &Dataset,
    evaluator: &(impl Evaluator + ?Sized),
    policy: &BaselinePolicy,
    cap: usize,
    executor: &X,
) -> Result<(UtilityTable, PredictionTable)> {
    let schema = dataset.schema();
    let n = schema.len();
    if n > cap || n >= 31 {
        return Err(Error::CapExceeded { n, cap });
    }
    let labels = dataset.labels();
    let (majority, share) = majority_classifier(&labels)?;

    let job = |j: usize| -> Result<(String, Vec<usize>, f64)> {
        let mask = CoalitionMask(j as u64 + 1);
        let key = coalition_key(mask, schema)?;
        let masked = apply_mask(dataset, mask, policy)?;
        let predictions = evaluate(evaluator, &key, &masked)?;
        let acc = accuracy(&predictions, &labels)?;
        Ok((key, predictions, acc))
    };
    let jobs = (1usize << n) - 1;
    let results = if evaluator.is_serial() {
        Sequential.map(jobs, job)
    } else {
        executor.map(jobs, job)
    };

    let mut values = Vec::with_capacity(1 << n);
    values.push(share);
    let mut predictions = PredictionTable {
        dataset_id: dataset.id().into(),
        entries: Default::default(),
    };
    predictions.entries.insert(
        coalition_key(CoalitionMask::EMPTY, schema)?,
        alloc::vec![majority; labels.len()],
    );
    for result in results {
        let (key, preds, acc) = result?;
        values.push(acc);
        predictions.entries.insert(key, preds);
    }
    Ok((UtilityTable::from_values(schema.clone(), values)?, predictions))
}
