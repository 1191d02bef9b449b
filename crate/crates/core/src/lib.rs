//! Modality attribution for multi-modal classifiers.
//!
//! Modalities are treated as players of a coalition game whose utility is the
//! accuracy of a black-box classifier with the absent modalities replaced by
//! baseline values. From the resulting table this crate derives
//!
//! * the normalized Shapley contribution of each modality ([`shapley::shape_marginal`]),
//! * the cooperation score of a modality set ([`shapley::cooperation_score`]),
//! * permutation based perceptual scores, including the in-class and
//!   out-class variants ([`perceptual`]).
//!
//! The crate is `no_std` (it needs `alloc`). File formats, the command line and
//! the external evaluator protocol live in the `shape` crate.

#![no_std]

extern crate alloc;

pub mod data;
pub mod error;
pub mod exec;
pub mod masking;
pub mod perceptual;
pub mod report;
pub mod score;
pub mod selftest;
pub mod shapley;
pub mod toybench;
pub mod utility;

pub use data::{CoalitionMask, Dataset, Modality, ModalitySchema, PredictionTable, Sample};
pub use error::{Error, Result};
pub use exec::{Executor, Sequential};
pub use masking::{BaselinePolicy, PermutationMode, PermutationPlan};
pub use perceptual::PerceptualResult;
pub use report::ScoreReport;
pub use shapley::{Game, ShapleyResult};
pub use utility::{Evaluator, UtilityTable};
