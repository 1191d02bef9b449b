//! Dataset, schema, coalition and prediction types shared by every module.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Key used for the empty coalition.
pub const EMPTY_COALITION_KEY: &str = "∅";

/// Separator between modality ids in a coalition key.
pub const KEY_SEPARATOR: char = '+';

/// Largest number of modalities a [`CoalitionMask`] can address.
pub const MAX_MODALITIES: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Modality {
    pub id: String,
    pub dim: usize,
}

/// Ordered list of modalities plus the number of classes.
///
/// The order of `modalities` is canonical: feature blocks, coalition bits and
/// coalition keys all follow it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModalitySchema {
    modalities: Vec<Modality>,
    num_classes: usize,
}

impl ModalitySchema {
    /// Validates ids (unique, non-empty, no `+`), dimensions and class count.
    ///
    /// A single modality is accepted here; scoring rejects it later.
    pub fn new(modalities: Vec<Modality>, num_classes: usize) -> Result<Self> {
        if modalities.is_empty() {
            return Err(Error::InvalidSchema("no modalities".into()));
        }
        if modalities.len() > MAX_MODALITIES {
            return Err(Error::InvalidSchema(format!(
                "{} modalities exceed the limit of {MAX_MODALITIES}",
                modalities.len()
            )));
        }
        if num_classes < 2 {
            return Err(Error::InvalidSchema(format!(
                "num_classes must be at least 2, got {num_classes}"
            )));
        }
        for (i, m) in modalities.iter().enumerate() {
            if m.id.is_empty() {
                return Err(Error::InvalidSchema(format!("modality {i} has an empty id")));
            }
            if m.id.contains(KEY_SEPARATOR) || m.id == EMPTY_COALITION_KEY {
                return Err(Error::InvalidSchema(format!(
                    "modality id {:?} is reserved or contains '{KEY_SEPARATOR}'",
                    m.id
                )));
            }
            if m.dim == 0 {
                return Err(Error::InvalidSchema(format!("modality {:?} has dim 0", m.id)));
            }
            if modalities[..i].iter().any(|o| o.id == m.id) {
                return Err(Error::InvalidSchema(format!("duplicate modality id {:?}", m.id)));
            }
        }
        Ok(Self {
            modalities,
            num_classes,
        })
    }

    pub fn modalities(&self) -> &[Modality] {
        &self.modalities
    }

    pub fn len(&self) -> usize {
        self.modalities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modalities.is_empty()
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.modalities.iter().position(|m| m.id == id)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.modalities.iter().map(|m| m.id.as_str())
    }

    pub fn full_mask(&self) -> CoalitionMask {
        CoalitionMask::full(self.len())
    }
}

/// One labeled sample. `features[i]` belongs to schema modality `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub features: Vec<Vec<f64>>,
    pub label: usize,
}

/// A validated, immutable labeled dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    schema: ModalitySchema,
    samples: Vec<Sample>,
    id: String,
}

impl Dataset {
    pub fn new(schema: ModalitySchema, samples: Vec<Sample>, id: impl Into<String>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyDataset);
        }
        for (index, sample) in samples.iter().enumerate() {
            check_sample(&schema, index, sample)?;
        }
        Ok(Self {
            schema,
            samples,
            id: id.into(),
        })
    }

    /// Builds a dataset whose samples are already known to conform.
    pub(crate) fn from_parts(schema: ModalitySchema, samples: Vec<Sample>, id: String) -> Self {
        debug_assert!(!samples.is_empty());
        Self { schema, samples, id }
    }

    pub fn schema(&self) -> &ModalitySchema {
        &self.schema
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn labels(&self) -> Vec<usize> {
        self.samples.iter().map(|s| s.label).collect()
    }

    /// Number of samples per class, indexed by class.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = alloc::vec![0; self.schema.num_classes()];
        for s in &self.samples {
            counts[s.label] += 1;
        }
        counts
    }

    /// Converts back into the document form used by file formats.
    pub fn to_raw(&self) -> RawDataset {
        RawDataset {
            header: RawHeader {
                schema: self.schema.modalities.clone(),
                num_classes: self.schema.num_classes as i64,
                dataset_id: self.id.clone(),
            },
            records: self
                .samples
                .iter()
                .map(|s| RawRecord {
                    label: s.label as i64,
                    features: self
                        .schema
                        .ids()
                        .map(String::from)
                        .zip(s.features.iter().cloned())
                        .collect(),
                })
                .collect(),
        }
    }
}

fn check_sample(schema: &ModalitySchema, index: usize, sample: &Sample) -> Result<()> {
    let invalid = |reason: String| Error::InvalidSample { sample: index, reason };
    if sample.features.len() != schema.len() {
        return Err(invalid(format!(
            "expected {} feature blocks, got {}",
            schema.len(),
            sample.features.len()
        )));
    }
    for (m, block) in schema.modalities().iter().zip(&sample.features) {
        if block.len() != m.dim {
            return Err(invalid(format!(
                "modality {:?} has dimension {}, expected {}",
                m.id,
                block.len(),
                m.dim
            )));
        }
        if let Some(pos) = block.iter().position(|x| !x.is_finite()) {
            return Err(invalid(format!("modality {:?} component {pos} is not finite", m.id)));
        }
    }
    if sample.label >= schema.num_classes() {
        return Err(invalid(format!(
            "label {} out of range [0, {})",
            sample.label,
            schema.num_classes()
        )));
    }
    Ok(())
}

/// Header line of a dataset document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawHeader {
    pub schema: Vec<Modality>,
    pub num_classes: i64,
    pub dataset_id: String,
}

/// One sample line of a dataset document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawRecord {
    pub label: i64,
    pub features: BTreeMap<String, Vec<f64>>,
}

/// Parsed but unvalidated dataset document.
#[derive(Debug, Clone, PartialEq)]
pub struct RawDataset {
    pub header: RawHeader,
    pub records: Vec<RawRecord>,
}

/// Validates a parsed document. Every problem is reported with the index of
/// the offending sample; nothing is dropped.
pub fn validate_dataset(raw: &RawDataset) -> Result<Dataset> {
    let num_classes = usize::try_from(raw.header.num_classes)
        .map_err(|_| Error::InvalidSchema(format!("num_classes {}", raw.header.num_classes)))?;
    let schema = ModalitySchema::new(raw.header.schema.clone(), num_classes)?;
    let mut samples = Vec::with_capacity(raw.records.len());
    for (index, record) in raw.records.iter().enumerate() {
        let invalid = |reason: String| Error::InvalidSample { sample: index, reason };
        if let Some(extra) = record.features.keys().find(|k| schema.index_of(k).is_none()) {
            return Err(invalid(format!("unknown modality {extra:?}")));
        }
        let mut features = Vec::with_capacity(schema.len());
        for m in schema.modalities() {
            let block = record
                .features
                .get(&m.id)
                .ok_or_else(|| invalid(format!("missing modality {:?}", m.id)))?;
            features.push(block.clone());
        }
        if record.label < 0 || record.label as u64 >= num_classes as u64 {
            return Err(invalid(format!(
                "label {} out of range [0, {num_classes})",
                record.label
            )));
        }
        let sample = Sample {
            features,
            label: record.label as usize,
        };
        check_sample(&schema, index, &sample)?;
        samples.push(sample);
    }
    if samples.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(Dataset::from_parts(schema, samples, raw.header.dataset_id.clone()))
}

/// Set of present modalities, one bit per schema index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct CoalitionMask(pub u64);

impl CoalitionMask {
    pub const EMPTY: Self = Self(0);

    pub fn full(n: usize) -> Self {
        if n >= 64 {
            Self(u64::MAX)
        } else {
            Self((1u64 << n) - 1)
        }
    }

    pub fn singleton(index: usize) -> Self {
        Self(1u64 << index)
    }

    pub fn from_indices(indices: impl IntoIterator<Item = usize>) -> Self {
        Self(indices.into_iter().fold(0, |acc, i| acc | (1u64 << i)))
    }

    pub fn from_ids<'a>(schema: &ModalitySchema, ids: impl IntoIterator<Item = &'a str>) -> Result<Self> {
        let mut mask = Self::EMPTY;
        for id in ids {
            let i = schema
                .index_of(id)
                .ok_or_else(|| Error::SchemaMismatch(format!("unknown modality {id:?}")))?;
            mask = mask.with(i);
        }
        Ok(mask)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn contains(self, index: usize) -> bool {
        index < 64 && self.0 & (1u64 << index) != 0
    }

    pub fn with(self, index: usize) -> Self {
        Self(self.0 | (1u64 << index))
    }

    pub fn without(self, index: usize) -> Self {
        Self(self.0 & !(1u64 << index))
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_subset_of(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    /// Schema indices of present modalities, ascending.
    pub fn indices(self) -> impl Iterator<Item = usize> {
        let bits = self.0;
        (0..64).filter(move |i| bits & (1u64 << i) != 0)
    }

    /// Canonical key: present ids in schema order joined by `+`, `∅` if empty.
    pub fn key(self, schema: &ModalitySchema) -> Result<String> {
        coalition_key(self, schema)
    }
}

/// Canonical string key of a coalition. Injective over subsets of the schema.
pub fn coalition_key(mask: CoalitionMask, schema: &ModalitySchema) -> Result<String> {
    if !mask.is_subset_of(schema.full_mask()) {
        return Err(Error::SchemaMismatch(format!(
            "coalition bits {:#x} reference modalities beyond the {} in the schema",
            mask.0,
            schema.len()
        )));
    }
    if mask.is_empty() {
        return Ok(EMPTY_COALITION_KEY.to_string());
    }
    let mut key = String::new();
    for i in mask.indices() {
        if !key.is_empty() {
            key.push(KEY_SEPARATOR);
        }
        key.push_str(&schema.modalities()[i].id);
    }
    Ok(key)
}

/// Inverse of [`coalition_key`]. Rejects unknown ids, repeats and non-canonical order.
pub fn parse_coalition_key(key: &str, schema: &ModalitySchema) -> Result<CoalitionMask> {
    if key == EMPTY_COALITION_KEY {
        return Ok(CoalitionMask::EMPTY);
    }
    let mut mask = CoalitionMask::EMPTY;
    let mut last: Option<usize> = None;
    for id in key.split(KEY_SEPARATOR) {
        let i = schema
            .index_of(id)
            .ok_or_else(|| Error::SchemaMismatch(format!("unknown modality {id:?} in key {key:?}")))?;
        if last.is_some_and(|l| l >= i) {
            return Err(Error::SchemaMismatch(format!("non-canonical key {key:?}")));
        }
        last = Some(i);
        mask = mask.with(i);
    }
    Ok(mask)
}

/// Cached per-coalition predictions for one dataset.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PredictionTable {
    pub dataset_id: String,
    pub entries: BTreeMap<String, Vec<usize>>,
}
