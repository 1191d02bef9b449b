//! Coalition-masked and permutation-modified views of a dataset.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{coalition_key, CoalitionMask, Dataset, Sample};
use crate::error::{Error, Result};

/// How absent modalities are filled in.
///
/// The empty coalition is never filled: its utility always comes from the
/// majority classifier (see [`crate::utility::majority_classifier`]).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselinePolicy {
    fill_value: f64,
}

impl BaselinePolicy {
    pub fn new(fill_value: f64) -> Result<Self> {
        if !fill_value.is_finite() {
            return Err(Error::InvalidPlan(format!("fill value {fill_value} is not finite")));
        }
        Ok(Self { fill_value })
    }

    pub fn fill_value(&self) -> f64 {
        self.fill_value
    }
}

impl Default for BaselinePolicy {
    fn default() -> Self {
        Self { fill_value: 0.0 }
    }
}

/// Returns a copy of `dataset` in which every modality outside `mask` has all
/// components replaced by the policy's fill value. Present modalities and
/// labels are untouched.
pub fn apply_mask(dataset: &Dataset, mask: CoalitionMask, policy: &BaselinePolicy) -> Result<Dataset> {
    let schema = dataset.schema();
    // validates the mask against the schema
    coalition_key(mask, schema)?;
    if mask.is_empty() {
        return Err(Error::EmptyCoalition);
    }
    let fill = policy.fill_value;
    let samples = dataset
        .samples()
        .iter()
        .map(|s| Sample {
            features: s
                .features
                .iter()
                .enumerate()
                .map(|(i, block)| {
                    if mask.contains(i) {
                        block.clone()
                    } else {
                        alloc::vec![fill; block.len()]
                    }
                })
                .collect(),
            label: s.label,
        })
        .collect();
    Ok(Dataset::from_parts(schema.clone(), samples, dataset.id().into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PermutationMode {
    /// Donor drawn from every other sample.
    Uniform,
    /// Donor drawn from other samples of the same class.
    InClass,
    /// Donor drawn from samples of a different class.
    OutClass,
}

impl PermutationMode {
    pub const ALL: [PermutationMode; 3] = [Self::Uniform, Self::InClass, Self::OutClass];

    /// Short name used in reports: `uniform`, `in`, `out`.
    pub fn short_name(self) -> &'static str {
        match self {
            Self::Uniform => "uniform",
            Self::InClass => "in",
            Self::OutClass => "out",
        }
    }
}

impl fmt::Display for PermutationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Uniform => "uniform",
            Self::InClass => "in-class",
            Self::OutClass => "out-class",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermutationPlan {
    pub target: CoalitionMask,
    pub mode: PermutationMode,
    pub repeats: usize,
    pub seed: u64,
}

impl PermutationPlan {
    pub const DEFAULT_REPEATS: usize = 10;

    pub fn new(target: CoalitionMask, mode: PermutationMode, repeats: usize, seed: u64) -> Self {
        Self {
            target,
            mode,
            repeats,
            seed,
        }
    }

    fn validate(&self, dataset: &Dataset) -> Result<String> {
        if self.target.is_empty() {
            return Err(Error::InvalidPlan("empty permutation target".into()));
        }
        if self.repeats == 0 {
            return Err(Error::InvalidPlan("repeats must be at least 1".into()));
        }
        coalition_key(self.target, dataset.schema())
    }
}

/// A permuted dataset together with the donor chosen for every sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Permuted {
    pub dataset: Dataset,
    pub donors: Vec<usize>,
    /// In-class receivers with no other same-class sample; they keep their own block.
    pub self_donations: usize,
}

/// Seed of the donor stream for one `(seed, repeat, target)` triple.
///
/// FNV-1a over the tuple followed by a splitmix64 finalizer, so the value is
/// stable across platforms and releases.
pub fn stream_seed(seed: u64, repeat_index: usize, target_key: &str) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut h = OFFSET;
    let bytes = seed
        .to_le_bytes()
        .into_iter()
        .chain((repeat_index as u64).to_le_bytes())
        .chain(target_key.bytes());
    for b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(PRIME);
    }
    let mut z = h.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Replaces the target feature blocks of every sample with those of a donor.
///
/// Donors are drawn independently per receiver (with replacement across
/// receivers). One donor is drawn per receiver and supplies every target
/// modality, so multi-modality targets move as a joint block.
pub fn permute_modalities(dataset: &Dataset, plan: &PermutationPlan, repeat_index: usize) -> Result<Permuted> {
    let target_key = plan.validate(dataset)?;
    if repeat_index >= plan.repeats {
        return Err(Error::InvalidPlan(format!(
            "repeat index {repeat_index} out of range for {} repeats",
            plan.repeats
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(plan.seed, repeat_index, &target_key));
    let (donors, self_donations) = draw_donors(dataset, plan.mode, &mut rng)?;

    let samples = dataset.samples();
    let permuted = samples
        .iter()
        .zip(&donors)
        .map(|(s, &j)| Sample {
            features: s
                .features
                .iter()
                .enumerate()
                .map(|(m, block)| {
                    if plan.target.contains(m) {
                        samples[j].features[m].clone()
                    } else {
                        block.clone()
                    }
                })
                .collect(),
            label: s.label,
        })
        .collect();
    Ok(Permuted {
        dataset: Dataset::from_parts(dataset.schema().clone(), permuted, dataset.id().into()),
        donors,
        self_donations,
    })
}

fn draw_donors(dataset: &Dataset, mode: PermutationMode, rng: &mut ChaCha8Rng) -> Result<(Vec<usize>, usize)> {
    let n = dataset.len();
    let labels = dataset.labels();
    let num_classes = dataset.schema().num_classes();
    let mut by_class: Vec<Vec<usize>> = alloc::vec![Vec::new(); num_classes];
    for (i, &y) in labels.iter().enumerate() {
        by_class[y].push(i);
    }
    let mut donors = Vec::with_capacity(n);
    let mut self_donations = 0;
    match mode {
        PermutationMode::Uniform => {
            if n < 2 {
                return Err(Error::NoValidDonor {
                    sample: 0,
                    mode: "uniform",
                });
            }
            for i in 0..n {
                let k = rng.random_range(0..n - 1);
                donors.push(if k >= i { k + 1 } else { k });
            }
        }
        PermutationMode::InClass => {
            // position of each sample inside its class list
            let mut rank = alloc::vec![0; n];
            for members in &by_class {
                for (r, &i) in members.iter().enumerate() {
                    rank[i] = r;
                }
            }
            for i in 0..n {
                let pool = &by_class[labels[i]];
                if pool.len() < 2 {
                    self_donations += 1;
                    donors.push(i);
                    continue;
                }
                let k = rng.random_range(0..pool.len() - 1);
                donors.push(if k >= rank[i] { pool[k + 1] } else { pool[k] });
            }
        }
        PermutationMode::OutClass => {
            let others: Vec<Vec<usize>> = (0..num_classes)
                .map(|c| (0..n).filter(|&j| labels[j] != c).collect())
                .collect();
            for (i, &y) in labels.iter().enumerate() {
                let pool = &others[y];
                if pool.is_empty() {
                    return Err(Error::NoValidDonor {
                        sample: i,
                        mode: "out-class",
                    });
                }
                donors.push(pool[rng.random_range(0..pool.len())]);
            }
        }
    }
    Ok((donors, self_donations))
}
