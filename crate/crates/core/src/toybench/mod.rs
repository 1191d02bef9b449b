//! Synthetic multi-modal regimes and small deterministic classifiers.

mod models;
mod regimes;

pub use models::{fit_predict, ToyModel, ToyModelKind, EPOCHS, LEARNING_RATE};
pub use regimes::{class_counts, generate, Regime, RegimeSpec};
