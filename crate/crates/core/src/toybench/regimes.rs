use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Modality, ModalitySchema, Sample};
use crate::error::{Error, Result};

/// Distance of class centroids (and XOR bit codes) from the origin.
const SEPARATION: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// `T` carries the label, `V` is label-independent noise.
    DominantRedundant,
    /// `T` carries the label, `A` is a fixed linear transform of `T` plus noise.
    CorrelatedComplementary,
    /// Binary label is the XOR of one bit in `Tp` and one bit in `Th`.
    IndispensableXor,
}

impl Regime {
    pub const ALL: [Regime; 3] = [
        Self::DominantRedundant,
        Self::CorrelatedComplementary,
        Self::IndispensableXor,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::DominantRedundant => "dominant-redundant",
            Self::CorrelatedComplementary => "correlated-complementary",
            Self::IndispensableXor => "indispensable-xor",
        }
    }

    /// Modality ids in schema order.
    pub fn modality_ids(self) -> [&'static str; 2] {
        match self {
            Self::DominantRedundant => ["V", "T"],
            Self::CorrelatedComplementary => ["A", "T"],
            Self::IndispensableXor => ["Tp", "Th"],
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| Error::InvalidSpec(format!("unknown regime {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeSpec {
    pub regime: Regime,
    pub n_samples: usize,
    pub n_classes: usize,
    /// Dimension of each modality, in schema order.
    pub dims: Vec<usize>,
    pub class_balance: Vec<f64>,
    /// Standard deviation of the additive Gaussian noise.
    pub noise: f64,
    pub seed: u64,
    /// Label signal leaked into `Th` of the XOR regime (0 disables it).
    pub xor_bias: f64,
}

impl RegimeSpec {
    /// Balanced binary spec with the default dimensions and noise of `regime`.
    pub fn new(regime: Regime, n_samples: usize, seed: u64) -> Self {
        let noise = match regime {
            Regime::DominantRedundant | Regime::CorrelatedComplementary => 0.5,
            Regime::IndispensableXor => 0.3,
        };
        Self {
            regime,
            n_samples,
            n_classes: 2,
            dims: vec![4, 4],
            class_balance: vec![0.5, 0.5],
            noise,
            seed,
            xor_bias: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSpec(msg));
        if self.n_classes < 2 {
            return bad(format!("n_classes must be at least 2, got {}", self.n_classes));
        }
        if self.n_samples < self.n_classes {
            return bad(format!(
                "n_samples {} is below n_classes {}",
                self.n_samples, self.n_classes
            ));
        }
        if self.class_balance.len() != self.n_classes {
            return bad(format!(
                "class_balance has {} entries for {} classes",
                self.class_balance.len(),
                self.n_classes
            ));
        }
        if self.class_balance.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return bad("class_balance entries must be non-negative".into());
        }
        let total: f64 = self.class_balance.iter().sum();
        if libm::fabs(total - 1.0) > 1e-9 {
            return bad(format!("class_balance sums to {total}, not 1"));
        }
        if self.dims.len() != 2 || self.dims.contains(&0) {
            return bad("dims must list two positive dimensions".into());
        }
        if !(self.noise.is_finite() && self.noise >= 0.0) {
            return bad(format!("noise must be a non-negative number, got {}", self.noise));
        }
        if !self.xor_bias.is_finite() {
            return bad("xor_bias must be finite".into());
        }
        if self.regime == Regime::IndispensableXor && self.n_classes != 2 {
            return bad("the XOR regime is binary".into());
        }
        Ok(())
    }

    pub fn dataset_id(&self) -> String {
        format!("{}-n{}-s{}", self.regime, self.n_samples, self.seed)
    }
}

/// Exact class counts by largest remainder, ties to the lower class.
pub fn class_counts(n: usize, balance: &[f64]) -> Vec<usize> {
    let raw: Vec<f64> = balance.iter().map(|p| p * n as f64).collect();
    let mut counts: Vec<usize> = raw.iter().map(|r| libm::floor(*r) as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..balance.len()).collect();
    order.sort_by(|&a, &b| {
        let (ra, rb) = (raw[a] - libm::floor(raw[a]), raw[b] - libm::floor(raw[b]));
        rb.partial_cmp(&ra)
            .unwrap_or(core::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    for &c in order.iter().cycle().take(n.saturating_sub(assigned)) {
        counts[c] += 1;
    }
    counts
}

fn gaussian(rng: &mut ChaCha8Rng, dim: usize, std: f64) -> Vec<f64> {
    (0..dim).map(|_| std * rng.sample::<f64, _>(StandardNormal)).collect()
}

fn direction(rng: &mut ChaCha8Rng, dim: usize, length: f64) -> Vec<f64> {
    loop {
        let v = gaussian(rng, dim, 1.0);
        let norm = libm::sqrt(v.iter().map(|x| x * x).sum());
        if norm > 1e-6 {
            return v.into_iter().map(|x| length * x / norm).collect();
        }
    }
}

fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// Generates a dataset for `spec`. Same spec, same dataset.
pub fn generate(spec: &RegimeSpec) -> Result<Dataset> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let ids = spec.regime.modality_ids();
    let schema = ModalitySchema::new(
        ids.iter()
            .zip(&spec.dims)
            .map(|(id, &dim)| Modality { id: (*id).into(), dim })
            .collect(),
        spec.n_classes,
    )?;
    let mut labels: Vec<usize> = class_counts(spec.n_samples, &spec.class_balance)
        .into_iter()
        .enumerate()
        .flat_map(|(c, k)| core::iter::repeat_n(c, k))
        .collect();
    labels.shuffle(&mut rng);

    let (d0, d1) = (spec.dims[0], spec.dims[1]);
    let noise = spec.noise;
    let samples: Vec<Sample> = match spec.regime {
        Regime::DominantRedundant => {
            let centroids: Vec<Vec<f64>> = (0..spec.n_classes)
                .map(|_| direction(&mut rng, d1, SEPARATION))
                .collect();
            labels
                .iter()
                .map(|&y| {
                    let v = gaussian(&mut rng, d0, 1.0);
                    let t = add(&centroids[y], &gaussian(&mut rng, d1, noise));
                    Sample {
                        features: vec![v, t],
                        label: y,
                    }
                })
                .collect()
        }
        Regime::CorrelatedComplementary => {
            let centroids: Vec<Vec<f64>> = (0..spec.n_classes)
                .map(|_| direction(&mut rng, d1, SEPARATION))
                .collect();
            let scale = 1.0 / libm::sqrt(d1 as f64);
            let transform: Vec<Vec<f64>> = (0..d0).map(|_| gaussian(&mut rng, d1, scale)).collect();
            labels
                .iter()
                .map(|&y| {
                    let t = add(&centroids[y], &gaussian(&mut rng, d1, noise));
                    let projected: Vec<f64> = transform
                        .iter()
                        .map(|row| row.iter().zip(&t).map(|(w, x)| w * x).sum())
                        .collect();
                    let a = add(&projected, &gaussian(&mut rng, d0, noise));
                    Sample {
                        features: vec![a, t],
                        label: y,
                    }
                })
                .collect()
        }
        Regime::IndispensableXor => {
            let premise = direction(&mut rng, d0, SEPARATION);
            let hypothesis = direction(&mut rng, d1, SEPARATION);
            labels
                .iter()
                .map(|&y| {
                    let b1: bool = rng.random();
                    let b2 = b1 ^ (y == 1);
                    let sign = |b: bool| if b { 1.0 } else { -1.0 };
                    let p = add(
                        &premise.iter().map(|x| sign(b1) * x).collect::<Vec<_>>(),
                        &gaussian(&mut rng, d0, noise),
                    );
                    let mut h = add(
                        &hypothesis.iter().map(|x| sign(b2) * x).collect::<Vec<_>>(),
                        &gaussian(&mut rng, d1, noise),
                    );
                    if spec.xor_bias != 0.0 {
                        h[d1 - 1] += spec.xor_bias * sign(y == 1);
                    }
                    Sample {
                        features: vec![p, h],
                        label: y,
                    }
                })
                .collect()
        }
    };
    Dataset::new(schema, samples, spec.dataset_id())
}
